//! Coin selection engine for UTXO-style token wallets.
//!
//! The library provides three selection strategies over a token pool — an
//! exponentially weighted draw that prefers low-value tokens, a uniform
//! random draw, and a deterministic greedy — plus a value-binned variant of
//! the weighted draw. Around them sit a seeded
//! deposit/payment simulation harness with cross-run aggregation, and a
//! multi-threaded benchmark that measures spend latency and contention over
//! a shared wallet.

pub mod bench;
pub mod binning;
pub mod concurrent;
pub mod error;
pub mod histogram;
pub mod scenario;
pub mod select;
pub mod simulation;
pub mod token;
pub mod weights;

pub use bench::{run_bench, BenchConfig, BenchMetrics};
pub use binning::{select_boltzmann_binned, BinBase, BinScheme};
pub use concurrent::{concurrent_spend, SharedWallet, SpendReceipt};
pub use error::SelectionError;
pub use histogram::{final_histogram, Histogram, DEFAULT_BINS};
pub use scenario::{next_iteration, IterationEvents, ScenarioConfig, ScenarioKind};
pub use select::{
    select_boltzmann, select_greedy, select_random, select_with, SelectionOutcome,
    Strategy,
};
pub use simulation::{
    aggregate_runs, run_many, run_simulation, AggregateMetrics, RunMetrics,
    GENERATOR_ID,
};
pub use token::{Token, TokenId, TokenPool};
pub use weights::{
    boltzmann_weights, compute_beta, weighted_draw, BetaPolicy, WeightFunction,
};
