//! Multi-threaded spend benchmark over a shared wallet.
//!
//! Every worker alternates three deposits and one spend, drawing amounts
//! from the scenario-1 normal laws, and times each spend with a monotonic
//! clock. The contention rate is the fraction of spends that were impeded:
//! a failed exclusive probe for greedy, a reservation conflict for the
//! probabilistic strategies.

use std::collections::HashSet;
use std::sync::Barrier;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::concurrent::{concurrent_spend, SharedWallet, DEFAULT_MAX_RETRIES};
use crate::select::Strategy;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub strategy: Strategy,
    pub thread_count: u32,
    /// Spend operations per worker; each spend is preceded by three
    /// deposits.
    pub ops_per_thread: u32,
    pub deposit_mean: f64,
    pub deposit_std: f64,
    pub payment_mean: f64,
    pub payment_std: f64,
    /// Initial funding: `initial_tokens` tokens of `initial_token_value`
    /// each. Splitting the buffer avoids serializing every early spend on
    /// one giant token.
    pub initial_tokens: u32,
    pub initial_token_value: u64,
    pub seed: u64,
    pub max_retries: u32,
    /// Collect every spent token id and fail loudly on a double spend.
    pub verify_no_double_spend: bool,
}

impl BenchConfig {
    pub fn new(strategy: Strategy, thread_count: u32, ops_per_thread: u32) -> Self {
        BenchConfig {
            strategy,
            thread_count,
            ops_per_thread,
            deposit_mean: 1000.0,
            deposit_std: 250.0,
            payment_mean: 3000.0,
            payment_std: 500.0,
            initial_tokens: 16,
            initial_token_value: 625_000,
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            verify_no_double_spend: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThreadStats {
    pub spends: u64,
    pub contended: u64,
    pub failed: u64,
    pub latency_ns_total: u128,
    pub deposited: u64,
    pub spent_targets: u64,
}

/// Aggregated measurements for one (strategy, thread count) cell plus the
/// accounting needed to check exact conservation.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchMetrics {
    pub strategy: &'static str,
    pub thread_count: u32,
    pub total_spends: u64,
    pub contended_spends: u64,
    pub failed_spends: u64,
    pub contention_rate: f64,
    pub mean_latency_ns: u64,
    pub per_thread: Vec<ThreadStats>,
    pub initial_value: u64,
    pub total_deposited: u64,
    pub total_spent_targets: u64,
    pub final_value: u64,
}

impl BenchMetrics {
    /// initial + deposits - successful spend targets must equal the final
    /// wallet value exactly.
    pub fn conserves_value(&self) -> bool {
        self.initial_value as i128 + self.total_deposited as i128
            - self.total_spent_targets as i128
            == self.final_value as i128
    }
}

fn clamp_round(x: f64) -> u64 {
    if x < 1.0 {
        1
    } else {
        x.round() as u64
    }
}

pub fn run_bench(config: &BenchConfig) -> BenchMetrics {
    assert!(config.thread_count >= 1);
    assert!(config.ops_per_thread >= 1);

    let wallet = SharedWallet::new(
        std::iter::repeat(config.initial_token_value)
            .take(config.initial_tokens as usize),
    );
    let initial_value = wallet.total_value();
    let barrier = Barrier::new(config.thread_count as usize);

    let results: Vec<(ThreadStats, Vec<u64>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.thread_count)
            .map(|worker| {
                let wallet = &wallet;
                let barrier = &barrier;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        config.seed.wrapping_add(worker as u64),
                    );
                    let deposit = Normal::new(config.deposit_mean, config.deposit_std)
                        .expect("deposit parameters");
                    let payment = Normal::new(config.payment_mean, config.payment_std)
                        .expect("payment parameters");

                    let mut stats = ThreadStats::default();
                    let mut spent_ids = Vec::new();
                    barrier.wait();

                    for _ in 0..config.ops_per_thread {
                        for _ in 0..3 {
                            let value = clamp_round(deposit.sample(&mut rng));
                            wallet.deposit(value);
                            stats.deposited += value;
                        }

                        let target = clamp_round(payment.sample(&mut rng));
                        let started = Instant::now();
                        let receipt = concurrent_spend(
                            wallet,
                            target,
                            config.strategy,
                            &mut rng,
                            config.max_retries,
                        );
                        stats.latency_ns_total += started.elapsed().as_nanos();
                        stats.spends += 1;
                        if receipt.contended {
                            stats.contended += 1;
                        }
                        match receipt.outcome {
                            Ok(outcome) => {
                                stats.spent_targets += target;
                                if config.verify_no_double_spend {
                                    spent_ids
                                        .extend(outcome.selected.iter().map(|t| t.id.0));
                                }
                            }
                            Err(_) => stats.failed += 1,
                        }
                    }
                    (stats, spent_ids)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    if config.verify_no_double_spend {
        let all: Vec<u64> = results.iter().flat_map(|(_, ids)| ids.clone()).collect();
        let unique: HashSet<u64> = all.iter().copied().collect();
        assert_eq!(unique.len(), all.len(), "double spend detected");
    }

    let per_thread: Vec<ThreadStats> =
        results.into_iter().map(|(stats, _)| stats).collect();
    let total_spends: u64 = per_thread.iter().map(|s| s.spends).sum();
    let contended_spends: u64 = per_thread.iter().map(|s| s.contended).sum();
    let failed_spends: u64 = per_thread.iter().map(|s| s.failed).sum();
    let latency_total: u128 = per_thread.iter().map(|s| s.latency_ns_total).sum();
    let total_deposited: u64 = per_thread.iter().map(|s| s.deposited).sum();
    let total_spent_targets: u64 = per_thread.iter().map(|s| s.spent_targets).sum();

    BenchMetrics {
        strategy: config.strategy.name(),
        thread_count: config.thread_count,
        total_spends,
        contended_spends,
        failed_spends,
        contention_rate: contended_spends as f64 / total_spends as f64,
        mean_latency_ns: (latency_total / total_spends as u128) as u64,
        per_thread,
        initial_value,
        total_deposited,
        total_spent_targets,
        final_value: wallet.total_value(),
    }
}
