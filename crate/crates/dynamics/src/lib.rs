//! Meta-queue order book dynamics driven by a Hawkes event stream.
//!
//! Each side of the book holds a top meta-queue (the best levels) and a deep
//! meta-queue (the levels behind it, out to a fixed half depth M around the
//! mid). Events change volumes, widths and the spread through the handlers in
//! [`handlers`]; [`sim`] couples them to the point process.

pub mod config;
pub mod error;
pub mod handlers;
pub mod marks;
pub mod sim;

pub use config::{HandlerConfig, InitConfig, PartitionMode, RunSettings, XiMode};
pub use error::{DynamicsError, Result};
pub use handlers::{
    apply_deep_cancel, apply_deep_limit_order, apply_event, apply_is_limit_order, apply_market_order,
    apply_marked_event, apply_top_cancel, apply_top_limit_order, enforce_depth, max_deep_width, partition_uniform,
    xi_uniform, Effect, VolumeLedger, MAX_WATERFALL_DEPLETIONS,
};
pub use marks::{Mark, MarkSource, RecordingMarks, SampledMarks, TapeMarks};
pub use sim::{initial_state, run_simulation, RunStats, Simulation, SimulationOutput, Snapshot};
