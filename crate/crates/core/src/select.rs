//! The three selection strategies and the shared draw loop.
//!
//! All strategies remove the selected tokens from the pool and report any
//! change; whether a change token re-enters the pool is the caller's call.

use rand::Rng;

use crate::binning::BinScheme;
use crate::error::SelectionError;
use crate::token::{Token, TokenPool};
use crate::weights::{weighted_draw, BetaPolicy, WeightFunction};

/// Result of one successful selection: the chosen tokens in draw order, the
/// change owed back to the wallet, and how many draw rounds ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionOutcome {
    pub selected: Vec<Token>,
    pub change: u64,
    pub draws: u32,
}

impl SelectionOutcome {
    /// Sum of the selected values, equal to target + change.
    pub fn total(&self) -> u64 {
        self.selected.iter().map(|t| t.value).sum()
    }
}

/// Strategy identifier used by the simulation engine, bench harness and CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Boltzmann,
    Random,
    Greedy,
    BoltzmannBinned(BinScheme),
}

impl Strategy {
    pub fn select<R: Rng + ?Sized>(
        &self,
        pool: &mut TokenPool,
        target: u64,
        rng: &mut R,
    ) -> Result<SelectionOutcome, SelectionError> {
        match self {
            Strategy::Boltzmann => select_boltzmann(pool, target, rng),
            Strategy::Random => select_random(pool, target, rng),
            Strategy::Greedy => select_greedy(pool, target),
            Strategy::BoltzmannBinned(scheme) => {
                crate::binning::select_boltzmann_binned(pool, target, rng, *scheme)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Boltzmann => "bd",
            Strategy::Random => "rd",
            Strategy::Greedy => "greedy",
            Strategy::BoltzmannBinned(_) => "bd-binned",
        }
    }
}

/// Checks shared by every strategy. Returns the all-tokens outcome when the
/// pool total matches the target exactly; in that case no weights are ever
/// computed.
fn preflight(
    pool: &mut TokenPool,
    target: u64,
) -> Result<Option<SelectionOutcome>, SelectionError> {
    if target == 0 {
        return Err(SelectionError::ZeroTarget);
    }
    if pool.total() < target {
        return Err(SelectionError::InsufficientFunds {
            shortfall: target - pool.total(),
        });
    }
    if pool.total() == target {
        return Ok(Some(SelectionOutcome {
            selected: pool.drain_all(),
            change: 0,
            draws: 0,
        }));
    }
    Ok(None)
}

/// Draw loop shared by the probabilistic strategies: recompute weights over
/// the remaining tokens, draw one, move it to the selection, stop as soon as
/// the selected sum covers the target.
pub fn select_with<R: Rng + ?Sized>(
    pool: &mut TokenPool,
    target: u64,
    weight_fn: &WeightFunction,
    rng: &mut R,
) -> Result<SelectionOutcome, SelectionError> {
    if let Some(outcome) = preflight(pool, target)? {
        return Ok(outcome);
    }

    let mut selected = Vec::new();
    let mut sum = 0u64;
    let mut draws = 0u32;
    while sum < target {
        let weights = weight_fn.weights(pool)?;
        let index = weighted_draw(&weights, rng)?;
        let token = pool.swap_remove(index);
        sum += token.value;
        selected.push(token);
        draws += 1;
    }

    Ok(SelectionOutcome { selected, change: sum - target, draws })
}

/// Exponentially weighted draw with beta recomputed as m / E over the
/// remaining tokens before every round.
pub fn select_boltzmann<R: Rng + ?Sized>(
    pool: &mut TokenPool,
    target: u64,
    rng: &mut R,
) -> Result<SelectionOutcome, SelectionError> {
    select_with(
        pool,
        target,
        &WeightFunction::Boltzmann(BetaPolicy::PoolAdaptive),
        rng,
    )
}

/// Uniform draw over the remaining tokens.
pub fn select_random<R: Rng + ?Sized>(
    pool: &mut TokenPool,
    target: u64,
    rng: &mut R,
) -> Result<SelectionOutcome, SelectionError> {
    select_with(pool, target, &WeightFunction::Uniform, rng)
}

/// Deterministic greedy selection: when a single token covers the target,
/// spend the smallest such token; otherwise accumulate tokens in descending
/// value order until the target is covered. Ties break by ascending id.
///
/// The single-cover rule is what keeps one change chain shrinking payment
/// after payment instead of splitting every large token in turn; with a
/// balanced deposit/payment flow it lets the chain die on an exact match.
pub fn select_greedy(
    pool: &mut TokenPool,
    target: u64,
) -> Result<SelectionOutcome, SelectionError> {
    if let Some(outcome) = preflight(pool, target)? {
        return Ok(outcome);
    }

    let cover = pool
        .tokens()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.value >= target)
        .min_by_key(|(_, t)| (t.value, t.id))
        .map(|(i, _)| i);
    if let Some(index) = cover {
        let token = pool.swap_remove(index);
        return Ok(SelectionOutcome {
            change: token.value - target,
            selected: vec![token],
            draws: 1,
        });
    }

    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by_key(|&i| {
        let t = pool.tokens()[i];
        (std::cmp::Reverse(t.value), t.id)
    });

    let mut picked = Vec::new();
    let mut sum = 0u64;
    for index in order {
        picked.push(index);
        sum += pool.tokens()[index].value;
        if sum >= target {
            break;
        }
    }

    // Remove from the highest storage index down so earlier indices stay
    // valid across swap_remove, then restore draw order.
    let mut by_storage = picked.clone();
    by_storage.sort_unstable_by(|a, b| b.cmp(a));
    let mut removed: Vec<Token> = by_storage
        .into_iter()
        .map(|i| pool.swap_remove(i))
        .collect();
    removed.sort_by_key(|t| (std::cmp::Reverse(t.value), t.id));

    let draws = removed.len() as u32;
    Ok(SelectionOutcome { selected: removed, change: sum - target, draws })
}
