use thiserror::Error;

/// Usage and schema problems exit with 2, everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<mqh_io::IoError> for CliError {
    fn from(e: mqh_io::IoError) -> Self {
        use mqh_io::IoError::*;
        match e {
            File { .. } | Parse { .. } | Alignment { .. } | Schema { .. } | Invalid(_) | Json(_) | Csv(_) => {
                CliError::Usage(e.to_string())
            }
            Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    mqh_dynamics::DynamicsError,
    mqh_analytics::AnalyticsError,
    mqh_calibration::CalibrationError,
    mqh_hawkes::HawkesError,
    std::io::Error,
    csv::Error,
    serde_json::Error
);
