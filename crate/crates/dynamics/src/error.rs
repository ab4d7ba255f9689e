use mqh_core::{ConstraintViolation, CoreError, EventType};
use mqh_hawkes::HawkesError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Hawkes(#[from] HawkesError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("liquidity exhausted at t = {time}: {detail}")]
    LiquidityExhaustion { time: f64, detail: String },
    #[error("state constraint violated after {event} at t = {time}: {violations:?}")]
    Invariant { time: f64, event: EventType, violations: Vec<ConstraintViolation> },
    #[error("mark tape: {0}")]
    Tape(String),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
