//! Parameter estimation from event logs: the in-spread power law (α, β),
//! geometric offsets and sizes, deep volume per level and kernel norms.

pub mod error;
pub mod is_fit;
pub mod kernels;
pub mod marks;
pub mod result;

pub use error::{CalibrationError, Result};
pub use is_fit::{alpha_from_intercept, calibrate_is_power_law, Baseline, IsFit, IsFitOptions, SpreadLevel};
pub use kernels::{estimate_kernels_binned, geometric_lag_edges, KernelEstimate};
pub use marks::{calibrate_deep_volume, calibrate_eta, calibrate_kappa, DeepVolumeFit, EtaFits, FamilyFit, KappaFits};
pub use result::{calibrate, CalibrationOptions, CalibrationResult};
