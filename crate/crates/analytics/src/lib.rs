//! Stylized-fact metrics for order book event logs. Every metric takes an
//! [`EventLog`] (simulated or ingested) or a sequence of [`BookView`]s and is
//! a pure function of it.

pub mod book;
pub mod error;
pub mod independence;
pub mod leverage;
pub mod log;
pub mod report;
pub mod series;
pub mod shape;
pub mod stats;
pub mod trades;

pub use book::{BookView, Resolution};
pub use error::{AnalyticsError, Result};
pub use independence::{independence_from_pairs, independence_ratio, IndependenceCell, IndependenceTable};
pub use leverage::{
    cell_of, leverage_from_sequence, leverage_grid, Cell, Family, LeverageAxis, LeverageGrid, LeverageTable, Transition,
};
pub use log::{EventLog, Segment};
pub use report::{compute_report, meta_queue_books, read_summary, write_report, MetricReport, ReportOptions, TickRegime};
pub use series::{index_of_dispersion, index_of_dispersion_pmf, WeightedSeries};
pub use shape::{average_shape, instantaneous_shape, sparsity_metrics, wasserstein_l1, ShapeProfile, SparsityReport};
pub use stats::{acf, epsilon_proxy, ks_two_sample, loglog_slope, ols, pearson, spearman, wls, Acf, KsResult, LogLogFit};
pub use trades::{density, mo_to_best_ratio, trade_mid_changes, TradeMidChanges};
