//! Shared wallet for concurrent spending.
//!
//! The probabilistic strategies never hold the store lock while selecting:
//! they clone a snapshot of the unreserved tokens, select on it, then
//! atomically reserve the chosen ids. A reservation conflict (some chosen
//! token was reserved or removed in the meantime) marks the spend as
//! contended and triggers a retry with a fresh snapshot; after a bounded
//! number of conflicts the spend falls back to the exclusive region. Greedy
//! depends on a consistent value ordering, so it always runs inside the
//! exclusive region; its spend counts as contended when the non-blocking
//! probe of that region fails.
//!
//! A reserved token is invisible to every snapshot taken after the
//! reservation completes, so a token can never back two spends. Commit
//! removes the reserved tokens and inserts the change token in one critical
//! section.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::Rng;

use crate::error::SelectionError;
use crate::select::{SelectionOutcome, Strategy};
use crate::token::{Token, TokenId, TokenPool};

/// Optimistic reservation attempts before a spend falls back to the
/// exclusive region.
pub const DEFAULT_MAX_RETRIES: u32 = 3;

struct WalletInner {
    /// id -> value of every live token, reserved or not.
    values: HashMap<u64, u64>,
    /// ids reserved by in-flight spends.
    reserved: HashSet<u64>,
    total: u64,
    reserved_value: u64,
}

impl WalletInner {
    fn unreserved_total(&self) -> u64 {
        self.total - self.reserved_value
    }

    fn unreserved_pool(&self) -> TokenPool {
        TokenPool::from_tokens(
            self.values
                .iter()
                .filter(|(id, _)| !self.reserved.contains(*id))
                .map(|(&id, &value)| Token::new(id, value)),
        )
    }

    fn insert(&mut self, id: u64, value: u64) {
        let fresh = self.values.insert(id, value).is_none();
        debug_assert!(fresh, "duplicate token id {id} in shared wallet");
        self.total += value;
    }

    fn remove(&mut self, id: u64) -> Option<u64> {
        let value = self.values.remove(&id)?;
        self.total -= value;
        if self.reserved.remove(&id) {
            self.reserved_value -= value;
        }
        Some(value)
    }
}

/// Token store spendable from many threads at once.
pub struct SharedWallet {
    inner: Mutex<WalletInner>,
    next_id: AtomicU64,
}

impl SharedWallet {
    pub fn new<I: IntoIterator<Item = u64>>(initial_values: I) -> Self {
        let wallet = SharedWallet {
            inner: Mutex::new(WalletInner {
                values: HashMap::new(),
                reserved: HashSet::new(),
                total: 0,
                reserved_value: 0,
            }),
            next_id: AtomicU64::new(0),
        };
        for value in initial_values {
            wallet.deposit(value);
        }
        wallet
    }

    fn fresh_id(&self) -> u64 {
        self.next_id.fetch_add(1, Ordering::Relaxed)
    }

    /// Adds a new token and returns its id.
    pub fn deposit(&self, value: u64) -> TokenId {
        let id = self.fresh_id();
        self.inner.lock().unwrap().insert(id, value);
        TokenId(id)
    }

    /// Number of live tokens, including reserved ones.
    pub fn token_count(&self) -> usize {
        self.inner.lock().unwrap().values.len()
    }

    /// Exact total value of live tokens, including reserved ones.
    pub fn total_value(&self) -> u64 {
        self.inner.lock().unwrap().total
    }

    /// Consistent copy of the spendable (unreserved) tokens.
    pub fn snapshot(&self) -> TokenPool {
        self.inner.lock().unwrap().unreserved_pool()
    }

    /// Atomically reserves all ids, or none of them if any is already
    /// reserved or gone.
    fn try_reserve(&self, ids: &[TokenId]) -> bool {
        let mut inner = self.inner.lock().unwrap();
        let free = ids.iter().all(|id| {
            inner.values.contains_key(&id.0) && !inner.reserved.contains(&id.0)
        });
        if !free {
            return false;
        }
        for id in ids {
            let value = inner.values[&id.0];
            inner.reserved.insert(id.0);
            inner.reserved_value += value;
        }
        true
    }

    /// Removes previously reserved tokens and inserts the change token, all
    /// in one critical section.
    fn commit(&self, ids: &[TokenId], change: u64) -> Option<TokenId> {
        let change_id = (change > 0).then(|| self.fresh_id());
        let mut inner = self.inner.lock().unwrap();
        for id in ids {
            let removed = inner.remove(id.0);
            debug_assert!(removed.is_some(), "committing an unreserved token");
        }
        if let Some(id) = change_id {
            inner.insert(id, change);
        }
        change_id.map(TokenId)
    }
}

/// What a concurrent spend produced. `outcome` carries the typed
/// insufficient-funds error when the wallet cannot cover the target even
/// inside the exclusive region.
#[derive(Debug)]
pub struct SpendReceipt {
    pub outcome: Result<SelectionOutcome, SelectionError>,
    pub contended: bool,
    pub change_id: Option<TokenId>,
}

pub fn concurrent_spend<R: Rng + ?Sized>(
    wallet: &SharedWallet,
    target: u64,
    strategy: Strategy,
    rng: &mut R,
    max_retries: u32,
) -> SpendReceipt {
    match strategy {
        Strategy::Greedy => {
            let (contended, guard) = match wallet.inner.try_lock() {
                Ok(guard) => (false, guard),
                Err(std::sync::TryLockError::WouldBlock) => {
                    (true, wallet.inner.lock().unwrap())
                }
                Err(std::sync::TryLockError::Poisoned(e)) => {
                    panic!("wallet poisoned: {e}")
                }
            };
            spend_exclusive(wallet, guard, target, strategy, rng, contended)
        }
        _ => spend_optimistic(wallet, target, strategy, rng, max_retries),
    }
}

fn spend_optimistic<R: Rng + ?Sized>(
    wallet: &SharedWallet,
    target: u64,
    strategy: Strategy,
    rng: &mut R,
    max_retries: u32,
) -> SpendReceipt {
    let mut contended = false;
    for _ in 0..=max_retries {
        let mut snapshot = wallet.snapshot();
        if snapshot.total() < target {
            // possibly a transient view while other spends hold
            // reservations; decide under the exclusive region
            break;
        }
        let outcome = match strategy.select(&mut snapshot, target, rng) {
            Ok(outcome) => outcome,
            Err(e) => {
                return SpendReceipt { outcome: Err(e), contended, change_id: None }
            }
        };
        let ids: Vec<TokenId> = outcome.selected.iter().map(|t| t.id).collect();
        if wallet.try_reserve(&ids) {
            let change_id = wallet.commit(&ids, outcome.change);
            return SpendReceipt { outcome: Ok(outcome), contended, change_id };
        }
        contended = true;
    }

    // Retries exhausted or the snapshot looked underfunded: finish inside
    // the exclusive region, where the view cannot shift underneath us.
    let guard = wallet.inner.lock().unwrap();
    spend_exclusive(wallet, guard, target, strategy, rng, contended)
}

fn spend_exclusive<R: Rng + ?Sized>(
    wallet: &SharedWallet,
    mut guard: std::sync::MutexGuard<'_, WalletInner>,
    target: u64,
    strategy: Strategy,
    rng: &mut R,
    contended: bool,
) -> SpendReceipt {
    let mut view = guard.unreserved_pool();
    debug_assert_eq!(view.total(), guard.unreserved_total());
    let outcome = match strategy.select(&mut view, target, rng) {
        Ok(outcome) => outcome,
        Err(e) => {
            return SpendReceipt { outcome: Err(e), contended, change_id: None }
        }
    };

    for token in &outcome.selected {
        let removed = guard.remove(token.id.0);
        debug_assert!(removed.is_some());
    }
    let change_id = if outcome.change > 0 {
        let id = wallet.fresh_id();
        guard.insert(id, outcome.change);
        Some(TokenId(id))
    } else {
        None
    };
    SpendReceipt { outcome: Ok(outcome), contended, change_id }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deposit_and_totals() {
        let wallet = SharedWallet::new([100, 200]);
        assert_eq!(wallet.token_count(), 2);
        assert_eq!(wallet.total_value(), 300);
        wallet.deposit(50);
        assert_eq!(wallet.token_count(), 3);
        assert_eq!(wallet.total_value(), 350);
    }

    #[test]
    fn reserved_tokens_are_invisible_to_snapshots() {
        let wallet = SharedWallet::new([10, 20, 30]);
        let snapshot = wallet.snapshot();
        assert_eq!(snapshot.len(), 3);

        let id = snapshot.tokens()[0].id;
        assert!(wallet.try_reserve(&[id]));
        let after = wallet.snapshot();
        assert_eq!(after.len(), 2);
        assert!(!after.contains(id));
        // totals still count the reserved token until commit
        assert_eq!(wallet.total_value(), 60);

        // double reservation of the same token fails
        assert!(!wallet.try_reserve(&[id]));
    }

    #[test]
    fn commit_removes_and_inserts_change() {
        let wallet = SharedWallet::new([10, 20]);
        let ids: Vec<TokenId> =
            wallet.snapshot().tokens().iter().map(|t| t.id).collect();
        assert!(wallet.try_reserve(&ids));
        let change = wallet.commit(&ids, 7);
        assert!(change.is_some());
        assert_eq!(wallet.token_count(), 1);
        assert_eq!(wallet.total_value(), 7);
    }

    #[test]
    fn single_thread_spend_is_never_contended() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for strategy in [Strategy::Boltzmann, Strategy::Random, Strategy::Greedy] {
            let wallet = SharedWallet::new([500, 600, 700]);
            let receipt = concurrent_spend(&wallet, 800, strategy, &mut rng, 3);
            assert!(!receipt.contended);
            let outcome = receipt.outcome.unwrap();
            assert!(outcome.total() >= 800);
            assert_eq!(
                wallet.total_value(),
                1800 - outcome.total() + outcome.change
            );
        }
    }

    #[test]
    fn insufficient_funds_is_typed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let wallet = SharedWallet::new([100]);
        let receipt = concurrent_spend(&wallet, 250, Strategy::Random, &mut rng, 3);
        assert_eq!(
            receipt.outcome.unwrap_err(),
            SelectionError::InsufficientFunds { shortfall: 150 }
        );
        assert_eq!(wallet.total_value(), 100);
    }

    #[test]
    fn exclusive_greedy_spends_like_the_pure_strategy() {
        let wallet = SharedWallet::new([1000, 300, 200]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let receipt = concurrent_spend(&wallet, 1100, Strategy::Greedy, &mut rng, 3);
        let outcome = receipt.outcome.unwrap();
        let values: Vec<u64> = outcome.selected.iter().map(|t| t.value).collect();
        assert_eq!(values, vec![1000, 300]);
        assert_eq!(outcome.change, 200);
        assert_eq!(wallet.total_value(), 400);
    }

    #[test]
    fn competing_full_pool_spends_serialize() {
        // two workers race to spend the whole wallet; exactly one wins
        for strategy in [Strategy::Boltzmann, Strategy::Random, Strategy::Greedy] {
            for round in 0..20 {
                let wallet = SharedWallet::new([40, 60]);
                let results: Vec<bool> = std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..2)
                        .map(|worker| {
                            let wallet = &wallet;
                            scope.spawn(move || {
                                let mut rng = ChaCha8Rng::seed_from_u64(
                                    round * 2 + worker,
                                );
                                concurrent_spend(wallet, 100, strategy, &mut rng, 3)
                                    .outcome
                                    .is_ok()
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().unwrap()).collect()
                });
                assert_eq!(
                    results.iter().filter(|&&ok| ok).count(),
                    1,
                    "exactly one spend of the full value can succeed"
                );
                assert_eq!(wallet.total_value(), 0);
            }
        }
    }

    #[test]
    fn no_double_spend_under_stress() {
        // a deliberately tiny pool maximizes conflicts
        let wallet = SharedWallet::new(vec![50; 8]);
        let spent: Vec<Vec<u64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|worker| {
                    let wallet = &wallet;
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(worker);
                        let mut ids = Vec::new();
                        for _ in 0..200 {
                            wallet.deposit(50);
                            let receipt = concurrent_spend(
                                wallet,
                                60,
                                Strategy::Random,
                                &mut rng,
                                3,
                            );
                            if let Ok(outcome) = receipt.outcome {
                                ids.extend(outcome.selected.iter().map(|t| t.id.0));
                            }
                        }
                        ids
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });

        let all: Vec<u64> = spent.into_iter().flatten().collect();
        let unique: HashSet<u64> = all.iter().copied().collect();
        assert_eq!(unique.len(), all.len(), "a token was spent twice");
    }
}
