use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("not enough variation: {0}")]
    InsufficientVariation(String),
    #[error("not enough data: {0}")]
    Insufficient(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Analytics(#[from] mqh_analytics::AnalyticsError),
    #[error(transparent)]
    Hawkes(#[from] mqh_hawkes::HawkesError),
    #[error(transparent)]
    Core(#[from] mqh_core::CoreError),
}

pub type Result<T> = std::result::Result<T, CalibrationError>;
