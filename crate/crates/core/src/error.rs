use thiserror::Error;

use crate::padic::HypothesisClause;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: u64, n: u64 },

    #[error("direct enumeration refused for n = {n} (limit {limit})")]
    EnumerationGuard { n: u64, limit: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("certificate hypothesis failed: {0}")]
    Hypothesis(HypothesisClause),

    #[error("exhaustive verification is limited to n <= {limit}, got n = {n}")]
    ExhaustiveLimit { n: u64, limit: u64 },

    #[error("prime claim failed for k = {k}, n = {n}: {reason}")]
    ClaimViolation { k: u64, n: u64, reason: String },

    #[error("Dusart bound violated: next prime {p} after x = {x} exceeds x(1 + 1/(2 ln^2 x))")]
    DusartViolation { x: String, p: u64 },

    #[error("value out of supported range: {0}")]
    Range(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
