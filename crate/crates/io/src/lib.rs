//! File formats: run configurations, event logs, snapshots and LOBSTER data.

pub mod classify;
pub mod config;
pub mod error;
pub mod eventlog;
pub mod lobster;

pub use classify::{classify_lobster, classify_stream, ClassifyCounters, ClassifyOptions, LobsterDataset, DEFAULT_SESSION};
pub use config::{
    merge_json, read_run_config, reference_config, write_run_config, HandlersConfig, HawkesConfig, KernelEntry,
    ResolvedRun, RunConfig, REFERENCE_MU,
};
pub use error::{IoError, Result};
pub use eventlog::{
    read_event_log, read_event_log_file, read_snapshots, write_event_log, write_event_log_file, write_snapshots,
    SnapshotLine, LOG_HEADER,
};
pub use lobster::{parse_lobster, BookSnapshotRow, Direction, LobsterKind, LobsterReader, RawLobsterEvent};
