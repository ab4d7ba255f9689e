use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HawkesError {
    #[error("invalid Hawkes specification: {0}")]
    InvalidSpec(String),
    #[error("kernel {source_type} -> {target_type} has b = {b} <= 1; its norm is infinite")]
    InfiniteNorm { source_type: String, target_type: String, b: f64 },
    #[error("query time {query} precedes the last event at {last}")]
    TimeOrder { query: f64, last: f64 },
    #[error("spread must be >= 1, got {0}")]
    InvalidSpread(i64),
    #[error("dominating rate is not finite ({0})")]
    RateOverflow(f64),
}

pub type Result<T> = std::result::Result<T, HawkesError>;
