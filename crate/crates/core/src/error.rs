use thiserror::Error;

/// Errors produced by the selection strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SelectionError {
    /// The pool cannot cover the payment target. Carries the missing amount.
    #[error("insufficient funds: short by {shortfall}")]
    InsufficientFunds { shortfall: u64 },

    /// An operation that needs at least one token was given an empty pool.
    #[error("empty pool")]
    EmptyPool,

    /// Payment targets must be strictly positive.
    #[error("target must be positive")]
    ZeroTarget,

    /// A weighted draw was attempted with no positive weight.
    #[error("all weights are zero")]
    ZeroWeights,
}

impl SelectionError {
    /// Shortfall carried by an insufficient-funds error, if that is what this is.
    pub fn shortfall(&self) -> Option<u64> {
        match self {
            SelectionError::InsufficientFunds { shortfall } => Some(*shortfall),
            _ => None,
        }
    }
}
