use thiserror::Error;

use crate::lob::Side;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("crossed or locked book: bid {bid_half_ticks} >= ask {ask_half_ticks} (half ticks)")]
    CrossedBook { bid_half_ticks: i64, ask_half_ticks: i64 },
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("{side:?} side: {msg}")]
    InvalidSide { side: Side, msg: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
