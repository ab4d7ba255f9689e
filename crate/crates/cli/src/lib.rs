//! Batch experiments over the meta-queue Hawkes order book model. Every
//! command is deterministic given its seed and writes CSV/JSON artifacts.

pub mod common;
pub mod ergodicity;
pub mod error;
pub mod inputs;
pub mod phase;
pub mod scaling;
pub mod simulate;

pub use common::{apply_overrides, derive_seed, load_config, simulate as simulate_config};
pub use ergodicity::{cmd_ergodicity, run_ergodicity, ErgodicityOptions, ErgodicityResult};
pub use error::{CliError, Result};
pub use inputs::{cmd_calibrate, cmd_report, load_input, Input, LoadedInput};
pub use phase::{cmd_phase_diagram, run_phase_diagram, PhaseOptions, PhaseResult, CALIBRATED_ASSETS};
pub use scaling::{cmd_scaling, run_scaling, ScalingOptions, ScalingResult, REFERENCE_SLOPES};
pub use simulate::{cmd_simulate, SimulateSummary};
