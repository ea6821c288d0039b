//! Value-binned variant of the exponential draw.
//!
//! Instead of weighting every token, each round weights the populated value
//! bins by exp(-beta * sup B_j) and then draws a token uniformly inside the
//! chosen bin. This caps the weight computation at the number of bins rather
//! than the pool size.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::SelectionError;
use crate::select::SelectionOutcome;
use crate::token::TokenPool;
use crate::weights::{compute_beta, weighted_draw};

/// Geometric progression the bin boundaries follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinBase {
    PowersOfTwo,
    PowersOfTen,
}

/// Partition of [0, inf) into value bins: B_0 = [0, 1) and
/// B_i = [base^(i-1), base^i) for i >= 1. Every non-negative value maps to
/// exactly one bin, and new bins appear upward on demand so the upper
/// boundary of any populated bin is always finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinScheme {
    pub base: BinBase,
}

impl BinScheme {
    pub fn powers_of_two() -> Self {
        BinScheme { base: BinBase::PowersOfTwo }
    }

    pub fn powers_of_ten() -> Self {
        BinScheme { base: BinBase::PowersOfTen }
    }

    /// Index of the bin holding `value`.
    pub fn bin_index(&self, value: u64) -> u32 {
        if value == 0 {
            return 0;
        }
        match self.base {
            BinBase::PowersOfTwo => 64 - value.leading_zeros(),
            BinBase::PowersOfTen => {
                let mut index = 1;
                let mut bound = 10u64;
                while value >= bound {
                    index += 1;
                    match bound.checked_mul(10) {
                        Some(next) => bound = next,
                        None => break, // 10^20 > u64::MAX, so the walk is done
                    }
                }
                index
            }
        }
    }

    /// Exclusive upper boundary sup B_i of bin `index`.
    pub fn upper_bound(&self, index: u32) -> f64 {
        if index == 0 {
            return 1.0;
        }
        match self.base {
            BinBase::PowersOfTwo => (index as f64).exp2(),
            BinBase::PowersOfTen => 10f64.powi(index as i32),
        }
    }

    /// Inclusive lower boundary of bin `index`.
    pub fn lower_bound(&self, index: u32) -> f64 {
        if index == 0 {
            0.0
        } else {
            self.upper_bound(index - 1)
        }
    }
}

/// Weights of the populated bins for the given remaining tokens: for each
/// filled bin, exp(-beta * sup B_j) shifted so the lowest populated bin has
/// weight exactly 1 (the shift cancels after normalization, as for per-token
/// weights). Empty bins do not appear, i.e. their probability is zero.
///
/// Returns (bin index, token positions in the pool slice, weight) sorted by
/// bin index.
pub fn bin_weights(
    pool: &TokenPool,
    beta: f64,
    scheme: BinScheme,
) -> Vec<(u32, Vec<usize>, f64)> {
    let mut filled: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (position, token) in pool.tokens().iter().enumerate() {
        filled
            .entry(scheme.bin_index(token.value))
            .or_default()
            .push(position);
    }
    let min_sup = filled
        .keys()
        .next()
        .map(|&i| scheme.upper_bound(i))
        .unwrap_or(0.0);
    filled
        .into_iter()
        .map(|(index, members)| {
            let weight = (-beta * (scheme.upper_bound(index) - min_sup)).exp();
            (index, members, weight)
        })
        .collect()
}

/// Same outer loop as the per-token exponential draw, but each round first
/// picks a populated bin by its boundary weight and then a token uniformly
/// within that bin. Beta is recomputed as m / E over the remaining tokens
/// before every round.
pub fn select_boltzmann_binned<R: Rng + ?Sized>(
    pool: &mut TokenPool,
    target: u64,
    rng: &mut R,
    scheme: BinScheme,
) -> Result<SelectionOutcome, SelectionError> {
    if target == 0 {
        return Err(SelectionError::ZeroTarget);
    }
    if pool.total() < target {
        return Err(SelectionError::InsufficientFunds {
            shortfall: target - pool.total(),
        });
    }
    if pool.total() == target {
        return Ok(SelectionOutcome {
            selected: pool.drain_all(),
            change: 0,
            draws: 0,
        });
    }

    let mut selected = Vec::new();
    let mut sum = 0u64;
    let mut draws = 0u32;
    while sum < target {
        let beta = compute_beta(pool)?;
        let bins = bin_weights(pool, beta, scheme);
        let weights: Vec<f64> = bins.iter().map(|(_, _, w)| *w).collect();
        let bin = weighted_draw(&weights, rng)?;
        let members = &bins[bin].1;
        let within = if members.len() == 1 {
            0
        } else {
            rng.gen_range(0..members.len())
        };
        let token = pool.swap_remove(members[within]);
        sum += token.value;
        selected.push(token);
        draws += 1;
    }

    Ok(SelectionOutcome { selected, change: sum - target, draws })
}
