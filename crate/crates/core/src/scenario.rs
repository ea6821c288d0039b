//! Deposit/payment generators for the three benchmark scenarios.
//!
//! - normal: 3 deposits N(1000, 250) and 1 payment N(3000, 500) per
//!   iteration, wallet seeded with a 10^7 token;
//! - poisson: 3 deposits Pois(1000) and 1 payment Pois(3000), same seeding;
//! - dirichlet: 1 constant deposit of 2000 split over 10 payments that sum
//!   to exactly 2000, wallet seeded with a 2000 token.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Normal,
    Poisson,
    Dirichlet,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Normal => "normal",
            ScenarioKind::Poisson => "poisson",
            ScenarioKind::Dirichlet => "dirichlet",
        }
    }
}

/// Full description of one simulation experiment.
///
/// `deposit_std` / `payment_std` only apply to the normal kind. For the
/// dirichlet kind `deposit_mean` is the constant deposit and the payment
/// fields are ignored: payments are a random split of the deposited amount.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub deposits_per_iteration: u32,
    pub payments_per_iteration: u32,
    pub deposit_mean: f64,
    pub deposit_std: f64,
    pub payment_mean: f64,
    pub payment_std: f64,
    pub initial_token_value: u64,
    pub iterations: u32,
    pub runs: u32,
    pub base_seed: u64,
    /// Reporting threshold: final tokens strictly below it count as dust.
    pub dust_threshold: u64,
}

impl ScenarioConfig {
    /// Paper defaults for the given kind, with a small dust threshold of 1%
    /// of the mean deposit. Iterations, runs and seed start at modest values
    /// and are meant to be overridden.
    pub fn new(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::Normal => ScenarioConfig {
                kind,
                deposits_per_iteration: 3,
                payments_per_iteration: 1,
                deposit_mean: 1000.0,
                deposit_std: 250.0,
                payment_mean: 3000.0,
                payment_std: 500.0,
                initial_token_value: 10_000_000,
                iterations: 1000,
                runs: 1,
                base_seed: 0,
                dust_threshold: 10,
            },
            ScenarioKind::Poisson => ScenarioConfig {
                kind,
                deposits_per_iteration: 3,
                payments_per_iteration: 1,
                deposit_mean: 1000.0,
                deposit_std: 0.0,
                payment_mean: 3000.0,
                payment_std: 0.0,
                initial_token_value: 10_000_000,
                iterations: 1000,
                runs: 1,
                base_seed: 0,
                dust_threshold: 10,
            },
            ScenarioKind::Dirichlet => ScenarioConfig {
                kind,
                deposits_per_iteration: 1,
                payments_per_iteration: 10,
                deposit_mean: 2000.0,
                deposit_std: 0.0,
                payment_mean: 200.0,
                payment_std: 0.0,
                initial_token_value: 2000,
                iterations: 1000,
                runs: 1,
                base_seed: 0,
                dust_threshold: 20,
            },
        }
    }
}

/// Deposits and payment targets generated for one iteration. Every value is
/// at least 1; for the dirichlet kind the payments sum exactly to the
/// deposits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationEvents {
    pub deposits: Vec<u64>,
    pub payments: Vec<u64>,
}

pub fn next_iteration<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> IterationEvents {
    match config.kind {
        ScenarioKind::Normal => {
            let deposit = Normal::new(config.deposit_mean, config.deposit_std)
                .expect("normal deposit parameters");
            let payment = Normal::new(config.payment_mean, config.payment_std)
                .expect("normal payment parameters");
            IterationEvents {
                deposits: (0..config.deposits_per_iteration)
                    .map(|_| clamp_round(deposit.sample(rng)))
                    .collect(),
                payments: (0..config.payments_per_iteration)
                    .map(|_| clamp_round(payment.sample(rng)))
                    .collect(),
            }
        }
        ScenarioKind::Poisson => {
            let deposit =
                Poisson::new(config.deposit_mean).expect("poisson deposit mean");
            let payment =
                Poisson::new(config.payment_mean).expect("poisson payment mean");
            IterationEvents {
                deposits: (0..config.deposits_per_iteration)
                    .map(|_| (deposit.sample(rng) as u64).max(1))
                    .collect(),
                payments: (0..config.payments_per_iteration)
                    .map(|_| (payment.sample(rng) as u64).max(1))
                    .collect(),
            }
        }
        ScenarioKind::Dirichlet => {
            let deposits =
                vec![config.deposit_mean as u64; config.deposits_per_iteration as usize];
            let total: u64 = deposits.iter().sum();
            let payments =
                dirichlet_split(total, config.payments_per_iteration as usize, rng);
            IterationEvents { deposits, payments }
        }
    }
}

fn clamp_round(x: f64) -> u64 {
    if x < 1.0 {
        1
    } else {
        x.round() as u64
    }
}

/// Splits `total` into `parts` integers that sum to `total` exactly, each at
/// least 1, with proportions Dirichlet(1,...,1): unit exponentials are
/// normalized, rounded, and the rounding remainder is folded into the last
/// part. Requires total >= parts.
fn dirichlet_split<R: Rng + ?Sized>(total: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    assert!(parts >= 1);
    assert!(total >= parts as u64, "cannot split {total} into {parts} parts of at least 1");

    let draws: Vec<f64> = (0..parts).map(|_| rng.sample(Exp1)).collect();
    let sum: f64 = draws.iter().sum();

    let mut shares: Vec<i64> = draws
        .iter()
        .map(|&x| (x / sum * total as f64).round() as i64)
        .collect();
    let assigned: i64 = shares.iter().sum();
    *shares.last_mut().unwrap() += total as i64 - assigned;

    // Rounding can strand a part below 1; top it up from the largest part.
    loop {
        let Some(low) = shares.iter().position(|&s| s < 1) else { break };
        let high = (0..parts).max_by_key(|&i| shares[i]).unwrap();
        let need = 1 - shares[low];
        let give = need.min(shares[high] - 1);
        shares[low] += give;
        shares[high] -= give;
    }

    shares.into_iter().map(|s| s as u64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirichlet_payments_sum_exactly() {
        let config = ScenarioConfig::new(ScenarioKind::Dirichlet);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let events = next_iteration(&config, &mut rng);
            assert_eq!(events.deposits, vec![2000]);
            assert_eq!(events.payments.len(), 10);
            assert_eq!(events.payments.iter().sum::<u64>(), 2000);
            assert!(events.payments.iter().all(|&p| p >= 1));
        }
    }

    #[test]
    fn normal_moments_match_configuration() {
        let config = ScenarioConfig::new(ScenarioKind::Normal);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut deposits = Vec::with_capacity(3 * n);
        for _ in 0..n {
            deposits.extend(next_iteration(&config, &mut rng).deposits);
        }
        let mean = deposits.iter().sum::<u64>() as f64 / deposits.len() as f64;
        let var = deposits
            .iter()
            .map(|&d| (d as f64 - mean).powi(2))
            .sum::<f64>()
            / deposits.len() as f64;
        assert!((mean - 1000.0).abs() < 5.0, "deposit mean {mean}");
        assert!((var.sqrt() - 250.0).abs() < 5.0, "deposit std {}", var.sqrt());
    }

    #[test]
    fn poisson_mean_matches_configuration() {
        let config = ScenarioConfig::new(ScenarioKind::Poisson);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut sum = 0u64;
        for _ in 0..n {
            sum += next_iteration(&config, &mut rng).payments[0];
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 3000.0).abs() < 10.0, "payment mean {mean}");
    }

    #[test]
    fn values_clamped_to_at_least_one() {
        // a wide normal produces plenty of non-positive raw draws
        let config = ScenarioConfig {
            deposit_mean: 1.0,
            deposit_std: 50.0,
            payment_mean: 1.0,
            payment_std: 50.0,
            ..ScenarioConfig::new(ScenarioKind::Normal)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let events = next_iteration(&config, &mut rng);
            assert!(events.deposits.iter().all(|&d| d >= 1));
            assert!(events.payments.iter().all(|&p| p >= 1));
        }
    }

    #[test]
    fn dirichlet_split_floor_case() {
        // total barely covers the part count: every part is forced to 1
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let parts = dirichlet_split(10, 10, &mut rng);
            assert_eq!(parts, vec![1; 10]);
        }
    }
}
