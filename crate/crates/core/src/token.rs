use std::fmt;

/// Identifier of a token, unique within any one pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An identified store of value. Values are integer minor units, so
/// conservation checks are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub id: TokenId,
    pub value: u64,
}

impl Token {
    pub fn new(id: u64, value: u64) -> Self {
        Token { id: TokenId(id), value }
    }
}

/// The wallet's unspent tokens with cached aggregates: `len()` is the token
/// count m and `total()` the exact value sum E.
///
/// Storage order is unspecified; selection strategies that care about order
/// sort on their own.
#[derive(Debug, Clone, Default)]
pub struct TokenPool {
    tokens: Vec<Token>,
    total: u64,
}

impl TokenPool {
    pub fn new() -> Self {
        TokenPool::default()
    }

    pub fn from_tokens<I: IntoIterator<Item = Token>>(tokens: I) -> Self {
        let mut pool = TokenPool::new();
        for token in tokens {
            pool.insert(token);
        }
        pool
    }

    /// Pool built from values alone, ids assigned 0, 1, 2, ...
    pub fn from_values(values: &[u64]) -> Self {
        TokenPool::from_tokens(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| Token::new(i as u64, v)),
        )
    }

    pub fn insert(&mut self, token: Token) {
        debug_assert!(
            !self.tokens.iter().any(|t| t.id == token.id),
            "duplicate token id {} in pool",
            token.id
        );
        self.total = self
            .total
            .checked_add(token.value)
            .expect("pool total overflows u64");
        self.tokens.push(token);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Exact sum of all token values.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        self.tokens.iter().map(|t| t.value)
    }

    pub fn contains(&self, id: TokenId) -> bool {
        self.tokens.iter().any(|t| t.id == id)
    }

    /// Removes and returns the token at `index` in O(1); the last token takes
    /// its place.
    pub(crate) fn swap_remove(&mut self, index: usize) -> Token {
        let token = self.tokens.swap_remove(index);
        self.total -= token.value;
        token
    }

    /// Empties the pool, returning all tokens in storage order.
    pub(crate) fn drain_all(&mut self) -> Vec<Token> {
        self.total = 0;
        std::mem::take(&mut self.tokens)
    }
}
