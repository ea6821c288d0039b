//! Multi-iteration wallet simulation and cross-run aggregation.
//!
//! Each run owns a single seeded generator that feeds both the scenario
//! draws and the selection draws, so a (config, strategy, run_index) triple
//! is fully reproducible. Runs are independent and may execute on separate
//! threads; results are merged in run-index order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::SelectionError;
use crate::scenario::{next_iteration, ScenarioConfig};
use crate::select::Strategy;
use crate::token::{Token, TokenPool};

/// Human-readable identifier of the per-run generator, recorded in run
/// manifests.
pub const GENERATOR_ID: &str = "chacha8";

/// Everything measured in one simulation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    /// Token count after each iteration.
    pub pool_sizes: Vec<u32>,
    /// Selected-token count of every executed payment, grouped by iteration.
    pub inputs_per_payment: Vec<Vec<u32>>,
    /// Payments that could not be covered and were skipped.
    pub skipped_payments: u64,
    /// Token values left in the wallet when the run ended.
    pub final_tokens: Vec<u64>,
    /// Final tokens strictly below the configured dust threshold.
    pub dust_count: u64,
}

/// Runs one simulation: seed the pool with the initial token, then per
/// iteration apply all deposits and then all payments in order. Change above
/// zero returns to the pool as a new token; a payment the pool cannot cover
/// is counted and skipped.
pub fn run_simulation(
    config: &ScenarioConfig,
    strategy: Strategy,
    run_index: u32,
) -> RunMetrics {
    let mut rng =
        ChaCha8Rng::seed_from_u64(config.base_seed.wrapping_add(run_index as u64));
    let mut next_id = 0u64;
    let mut fresh_id = || {
        let id = next_id;
        next_id += 1;
        id
    };

    let mut pool = TokenPool::new();
    pool.insert(Token::new(fresh_id(), config.initial_token_value));

    let mut metrics = RunMetrics {
        pool_sizes: Vec::with_capacity(config.iterations as usize),
        inputs_per_payment: Vec::with_capacity(config.iterations as usize),
        skipped_payments: 0,
        final_tokens: Vec::new(),
        dust_count: 0,
    };

    for _ in 0..config.iterations {
        let events = next_iteration(config, &mut rng);
        for value in events.deposits {
            pool.insert(Token::new(fresh_id(), value));
        }

        let mut inputs = Vec::with_capacity(events.payments.len());
        for target in events.payments {
            match strategy.select(&mut pool, target, &mut rng) {
                Ok(outcome) => {
                    inputs.push(outcome.selected.len() as u32);
                    if outcome.change > 0 {
                        pool.insert(Token::new(fresh_id(), outcome.change));
                    }
                }
                Err(SelectionError::InsufficientFunds { .. }) => {
                    metrics.skipped_payments += 1;
                }
                Err(e) => unreachable!("selection failed on a covered target: {e}"),
            }
        }

        metrics.inputs_per_payment.push(inputs);
        metrics.pool_sizes.push(pool.len() as u32);
    }

    metrics.final_tokens = pool.values().collect();
    metrics.dust_count = pool
        .values()
        .filter(|&v| v < config.dust_threshold)
        .count() as u64;
    metrics
}

/// Executes `config.runs` simulations, spreading run indices over worker
/// threads. The result vector is ordered by run index regardless of which
/// thread finished when.
pub fn run_many(config: &ScenarioConfig, strategy: Strategy) -> Vec<RunMetrics> {
    let runs = config.runs as usize;
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(runs.max(1));

    if workers <= 1 {
        return (0..config.runs)
            .map(|i| run_simulation(config, strategy, i))
            .collect();
    }

    let mut slots: Vec<Option<RunMetrics>> = Vec::new();
    slots.resize_with(runs, || None);
    let chunk = runs.div_ceil(workers);

    std::thread::scope(|scope| {
        for (worker, slice) in slots.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                for (offset, slot) in slice.iter_mut().enumerate() {
                    let index = (worker * chunk + offset) as u32;
                    *slot = Some(run_simulation(config, strategy, index));
                }
            });
        }
    });

    slots
        .into_iter()
        .map(|m| m.expect("every run index belongs to exactly one chunk"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("no runs to aggregate")]
    Empty,
    #[error("runs have mismatched series lengths")]
    MismatchedLengths,
}

/// Cross-run aggregate: per-iteration moments plus the pooled final-token
/// multiset for histogramming.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub runs: u32,
    pub iterations: u32,
    pub pool_mean: Vec<f64>,
    pub pool_std: Vec<f64>,
    /// Mean/deviation over runs of the per-iteration average input count.
    /// NaN where no run executed a payment in that iteration.
    pub inputs_mean: Vec<f64>,
    pub inputs_std: Vec<f64>,
    pub final_tokens: Vec<u64>,
    pub total_skipped: u64,
    pub total_dust: u64,
}

impl AggregateMetrics {
    /// Mean final pool size across runs.
    pub fn mean_final_pool(&self) -> f64 {
        *self.pool_mean.last().unwrap_or(&f64::NAN)
    }

    /// Grand mean of inputs per executed payment over all runs and
    /// iterations.
    pub fn mean_inputs_overall(&self) -> f64 {
        let finite: Vec<f64> = self
            .inputs_mean
            .iter()
            .copied()
            .filter(|m| m.is_finite())
            .collect();
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Population mean and standard deviation.
fn moments(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var =
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

pub fn aggregate_runs(runs: &[RunMetrics]) -> Result<AggregateMetrics, AggregateError> {
    let first = runs.first().ok_or(AggregateError::Empty)?;
    let iterations = first.pool_sizes.len();
    if runs.iter().any(|r| {
        r.pool_sizes.len() != iterations || r.inputs_per_payment.len() != iterations
    }) {
        return Err(AggregateError::MismatchedLengths);
    }

    let mut pool_mean = Vec::with_capacity(iterations);
    let mut pool_std = Vec::with_capacity(iterations);
    let mut inputs_mean = Vec::with_capacity(iterations);
    let mut inputs_std = Vec::with_capacity(iterations);

    for i in 0..iterations {
        let sizes: Vec<f64> = runs.iter().map(|r| r.pool_sizes[i] as f64).collect();
        let (mean, std) = moments(&sizes);
        pool_mean.push(mean);
        pool_std.push(std);

        // average over the iteration's executed payments, then across runs
        let per_run: Vec<f64> = runs
            .iter()
            .filter(|r| !r.inputs_per_payment[i].is_empty())
            .map(|r| {
                let inputs = &r.inputs_per_payment[i];
                inputs.iter().map(|&n| n as f64).sum::<f64>() / inputs.len() as f64
            })
            .collect();
        let (mean, std) = moments(&per_run);
        inputs_mean.push(mean);
        inputs_std.push(std);
    }

    Ok(AggregateMetrics {
        runs: runs.len() as u32,
        iterations: iterations as u32,
        pool_mean,
        pool_std,
        inputs_mean,
        inputs_std,
        final_tokens: runs.iter().flat_map(|r| r.final_tokens.clone()).collect(),
        total_skipped: runs.iter().map(|r| r.skipped_payments).sum(),
        total_dust: runs.iter().map(|r| r.dust_count).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioKind;

    fn dirichlet(iterations: u32) -> ScenarioConfig {
        ScenarioConfig {
            iterations,
            base_seed: 17,
            ..ScenarioConfig::new(ScenarioKind::Dirichlet)
        }
    }

    #[test]
    fn greedy_keeps_dirichlet_pool_at_one() {
        let metrics = run_simulation(&dirichlet(300), Strategy::Greedy, 0);
        assert!(metrics.pool_sizes.iter().all(|&s| s == 1));
        assert_eq!(metrics.skipped_payments, 0);
    }

    #[test]
    fn dirichlet_conserves_pool_total() {
        for strategy in [Strategy::Boltzmann, Strategy::Random, Strategy::Greedy] {
            let metrics = run_simulation(&dirichlet(200), strategy, 0);
            // the pool holds exactly the 2000 the wallet started with
            assert_eq!(metrics.final_tokens.iter().sum::<u64>(), 2000);
            assert_eq!(metrics.skipped_payments, 0);
        }
    }

    #[test]
    fn conservation_is_exact_per_iteration() {
        // replay the scenario draws to check total-in minus total-out
        let config = ScenarioConfig {
            iterations: 100,
            base_seed: 23,
            ..ScenarioConfig::new(ScenarioKind::Normal)
        };
        let metrics = run_simulation(&config, Strategy::Boltzmann, 4);

        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed.wrapping_add(4));
        let mut expected = config.initial_token_value as i128;
        let mut replay_pool = TokenPool::new();
        replay_pool.insert(Token::new(0, config.initial_token_value));
        let mut id = 1u64;
        for i in 0..config.iterations as usize {
            let events = next_iteration(&config, &mut rng);
            for v in &events.deposits {
                expected += *v as i128;
                replay_pool.insert(Token::new(id, *v));
                id += 1;
            }
            for target in &events.payments {
                match Strategy::Boltzmann.select(&mut replay_pool, *target, &mut rng) {
                    Ok(outcome) => {
                        expected -= *target as i128;
                        if outcome.change > 0 {
                            replay_pool.insert(Token::new(id, outcome.change));
                            id += 1;
                        }
                    }
                    Err(_) => {}
                }
            }
            assert_eq!(replay_pool.total() as i128, expected);
            assert_eq!(replay_pool.len() as u32, metrics.pool_sizes[i]);
        }
        assert_eq!(
            metrics.final_tokens.iter().map(|&v| v as i128).sum::<i128>(),
            expected
        );
    }

    #[test]
    fn runs_are_reproducible() {
        let config = ScenarioConfig {
            iterations: 150,
            base_seed: 99,
            ..ScenarioConfig::new(ScenarioKind::Poisson)
        };
        let a = run_simulation(&config, Strategy::Boltzmann, 7);
        let b = run_simulation(&config, Strategy::Boltzmann, 7);
        assert_eq!(a, b);
        let c = run_simulation(&config, Strategy::Boltzmann, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn parallel_runs_merge_in_index_order() {
        let config = ScenarioConfig {
            iterations: 60,
            runs: 6,
            base_seed: 5,
            ..ScenarioConfig::new(ScenarioKind::Normal)
        };
        let parallel = run_many(&config, Strategy::Random);
        let serial: Vec<RunMetrics> = (0..6)
            .map(|i| run_simulation(&config, Strategy::Random, i))
            .collect();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn single_run_aggregate_is_the_run() {
        let metrics = run_simulation(&dirichlet(50), Strategy::Random, 0);
        let agg = aggregate_runs(std::slice::from_ref(&metrics)).unwrap();
        for (i, &size) in metrics.pool_sizes.iter().enumerate() {
            assert_eq!(agg.pool_mean[i], size as f64);
            assert_eq!(agg.pool_std[i], 0.0);
        }
        assert_eq!(agg.final_tokens, metrics.final_tokens);
    }

    #[test]
    fn constant_series_aggregate_moments() {
        let mk = |size: u32| RunMetrics {
            pool_sizes: vec![size; 4],
            inputs_per_payment: vec![vec![size]; 4],
            skipped_payments: 0,
            final_tokens: vec![1],
            dust_count: 0,
        };
        let agg = aggregate_runs(&[mk(3), mk(5)]).unwrap();
        assert!(agg.pool_mean.iter().all(|&m| m == 4.0));
        assert!(agg.pool_std.iter().all(|&s| s == 1.0));
        assert!(agg.inputs_mean.iter().all(|&m| m == 4.0));
        assert!(agg.inputs_std.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn mismatched_series_rejected() {
        let a = run_simulation(&dirichlet(10), Strategy::Random, 0);
        let b = run_simulation(&dirichlet(11), Strategy::Random, 1);
        assert_eq!(
            aggregate_runs(&[a, b]),
            Err(AggregateError::MismatchedLengths)
        );
    }
}
