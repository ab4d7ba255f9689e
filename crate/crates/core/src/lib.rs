//! Core domain types of the meta-queue Hawkes order book model.

pub mod error;
pub mod lob;
pub mod sampling;
pub mod scalar;

pub use error::{CoreError, Result};
pub use lob::{
    check_constraints, mid_price, relative_tick_size, ConstraintKind, ConstraintViolation, EventRecord,
    EventType, LobState, MetaQueue, OrderKind, Side, SideState, TickPrice, TickSize, NUM_EVENT_TYPES,
};
pub use sampling::{
    fit_geometric_mle, fit_truncated_geometric_mle, sample_bounded, sample_deep_volume, DeepVolumeDist,
    GeomFit, GeomWithSpikes, Spike, TruncatedObs,
};
pub use scalar::Scalar;

/// Round-half-away-from-zero of `num / den` for non-negative integers.
pub fn round_ratio(num: i64, den: i64) -> i64 {
    debug_assert!(num >= 0 && den > 0);
    ((2 * num as i128 + den as i128) / (2 * den as i128)) as i64
}
