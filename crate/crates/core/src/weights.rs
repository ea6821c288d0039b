//! Probability weights for the draw-based strategies.
//!
//! The exponential weight of a token of value v is exp(-beta * v). Because a
//! constant shift of all values cancels out after normalization, the
//! implementation exponentiates v - v_min instead; the smallest remaining
//! token then always has weight exactly 1 and the weight vector cannot
//! underflow as a whole.

use rand::Rng;

use crate::error::SelectionError;
use crate::token::TokenPool;

/// Inverse temperature m / E over the remaining pool view: m tokens with
/// total value E. When E is zero every token value is equal, so beta 0
/// (uniform weights) preserves behavior.
pub fn compute_beta(pool: &TokenPool) -> Result<f64, SelectionError> {
    if pool.is_empty() {
        return Err(SelectionError::EmptyPool);
    }
    if pool.total() == 0 {
        return Ok(0.0);
    }
    Ok(pool.len() as f64 / pool.total() as f64)
}

/// Exponential weights proportional to exp(-beta * v), computed with the
/// minimum-value shift. `beta` must be finite and non-negative.
pub fn boltzmann_weights(values: &[u64], beta: f64) -> Vec<f64> {
    debug_assert!(!values.is_empty());
    debug_assert!(beta.is_finite() && beta >= 0.0);
    let min = values.iter().copied().min().unwrap_or(0);
    values
        .iter()
        .map(|&v| (-beta * (v - min) as f64).exp())
        .collect()
}

/// Draws an index with probability w_i / sum(w): one uniform variate checked
/// against a cumulative scan, O(m).
pub fn weighted_draw<R: Rng + ?Sized>(
    weights: &[f64],
    rng: &mut R,
) -> Result<usize, SelectionError> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(SelectionError::ZeroWeights);
    }
    let x = rng.gen::<f64>() * total;
    let mut cumulative = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if x < cumulative {
            return Ok(i);
        }
    }
    // Rounding in the scan can leave x at or above the final cumulative sum;
    // the draw then lands on the last index with positive weight.
    Ok(weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("positive total implies a positive weight"))
}

/// How the exponential strategy obtains beta for each draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaPolicy {
    /// Recompute m / E over the remaining tokens before every draw.
    PoolAdaptive,
    /// Use a constant beta (non-negative). `Fixed(0.0)` makes the exponential
    /// strategy draw exactly like the uniform one.
    Fixed(f64),
}

impl BetaPolicy {
    pub fn beta(&self, pool: &TokenPool) -> Result<f64, SelectionError> {
        match self {
            BetaPolicy::PoolAdaptive => compute_beta(pool),
            BetaPolicy::Fixed(beta) => Ok(*beta),
        }
    }
}

/// Pluggable per-token weight rule used by the draw loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFunction {
    /// exp(-beta * value) with beta from the policy.
    Boltzmann(BetaPolicy),
    /// Every remaining token weighs 1.
    Uniform,
    /// 1 / value, with zero-value tokens weighted as value 1 so the weight
    /// stays finite.
    Reciprocal,
}

impl WeightFunction {
    /// Weights for the current remaining pool view; finite, non-negative,
    /// and never all zero.
    pub fn weights(&self, pool: &TokenPool) -> Result<Vec<f64>, SelectionError> {
        if pool.is_empty() {
            return Err(SelectionError::EmptyPool);
        }
        match self {
            WeightFunction::Boltzmann(policy) => {
                let beta = policy.beta(pool)?;
                let values: Vec<u64> = pool.values().collect();
                Ok(boltzmann_weights(&values, beta))
            }
            WeightFunction::Uniform => Ok(vec![1.0; pool.len()]),
            WeightFunction::Reciprocal => {
                Ok(pool.values().map(|v| 1.0 / v.max(1) as f64).collect())
            }
        }
    }
}

/// Normalizes weights into probabilities. Helper for tests and reporting.
pub fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|&w| w / total).collect()
}
