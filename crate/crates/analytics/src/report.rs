//! All metrics of one log, serialized to JSON and per-metric CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::book::{BookView, Resolution};
use crate::error::{AnalyticsError, Result};
use crate::leverage::{leverage_grid, LeverageAxis, LeverageGrid};
use crate::log::EventLog;
use crate::shape::{average_shape, sparsity_metrics, ShapeProfile, SparsityReport};
use crate::stats::epsilon_proxy;
use crate::trades::{density, mo_to_best_ratio, trade_mid_changes};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickRegime {
    Large,
    Medium,
    Small,
}

impl TickRegime {
    /// Large below 2 ticks of mean spread, small from 10 ticks on.
    pub fn classify(mean_spread: f64) -> TickRegime {
        if mean_spread < 2.0 {
            TickRegime::Large
        } else if mean_spread < 10.0 {
            TickRegime::Medium
        } else {
            TickRegime::Small
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeSummary {
    pub n_moves: usize,
    pub n_zero: u64,
    pub mean_ticks: f64,
    pub mean_currency: f64,
    /// |Δp_mid| in half ticks → count.
    pub histogram: BTreeMap<i64, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub profile: ShapeProfile,
    pub quartiles: [f64; 3],
    pub argmax: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub n: usize,
    pub mean: f64,
    pub share_above_one: f64,
    pub density: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub resolution: Resolution,
    pub duration: f64,
    pub n_events: usize,
    pub event_counts: BTreeMap<String, u64>,
    pub mean_spread: f64,
    pub spread_variance: f64,
    pub spread_dispersion: Option<f64>,
    pub spread_pdf: BTreeMap<i64, f64>,
    pub regime: TickRegime,
    pub epsilon_proxy: Option<f64>,
    pub trades: Option<TradeSummary>,
    pub shape: Option<ShapeSummary>,
    pub sparsity: Option<SparsityReport>,
    pub mo_best_ratio: Option<RatioSummary>,
    #[serde(skip)]
    pub leverage: Option<(LeverageAxis, LeverageGrid)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub max_empty_rank: usize,
    pub leverage_log_bins: usize,
    pub ratio_bins: usize,
    pub ratio_max: f64,
    pub leverage: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { max_empty_rank: 5, leverage_log_bins: 8, ratio_bins: 40, ratio_max: 4.0, leverage: true }
    }
}

/// Books over time for shape and sparsity: meta-queue books of the log's
/// segments, weighted by duration.
pub fn meta_queue_books(log: &EventLog) -> Vec<(BookView, f64)> {
    log.segments().into_iter().map(|s| (BookView::from_meta_queues(&s.bid, &s.ask), s.duration)).collect()
}

/// Computes every metric. `books` overrides the meta-queue books when
/// level-resolved snapshots are available.
pub fn compute_report(
    label: &str,
    log: &EventLog,
    books: Option<&[(BookView, f64)]>,
    opts: &ReportOptions,
) -> Result<MetricReport> {
    log.validate()?;
    let spread = log.spread_series()?;
    let mean_spread = spread.time_weighted_mean();
    let mut event_counts = BTreeMap::new();
    for r in &log.records {
        *event_counts.entry(r.event_type.label().to_string()).or_insert(0) += 1;
    }
    let trades = trade_mid_changes(log).map(|t| TradeSummary {
        n_moves: t.changes_ticks.len(),
        n_zero: t.n_zero,
        mean_ticks: t.changes_ticks.iter().sum::<f64>() / t.changes_ticks.len() as f64,
        mean_currency: t.mean_currency,
        histogram: t.histogram,
    });

    let owned;
    let (books, resolution) = match books {
        Some(b) => (b, Resolution::PriceLevel),
        None => {
            owned = meta_queue_books(log);
            (owned.as_slice(), Resolution::MetaQueue)
        }
    };
    let shape = average_shape(books.iter().map(|(b, w)| (b, *w)), resolution).ok();
    let sparsity = match &shape {
        Some(s) => sparsity_metrics(books.iter().map(|(b, w)| (b, *w)), s, opts.max_empty_rank).ok(),
        None => None,
    };
    let shape = shape.map(|profile| ShapeSummary { quartiles: profile.quartiles(), argmax: profile.argmax(), profile });

    let ratios = mo_to_best_ratio(log);
    let mo_best_ratio = (!ratios.is_empty()).then(|| RatioSummary {
        n: ratios.len(),
        mean: ratios.iter().sum::<f64>() / ratios.len() as f64,
        share_above_one: ratios.iter().filter(|&&r| r > 1.0).count() as f64 / ratios.len() as f64,
        density: density(&ratios, opts.ratio_bins, opts.ratio_max),
    });

    let leverage = match (&shape, opts.leverage) {
        (Some(s), true) if log.records.len() > 1 => {
            let axis = LeverageAxis::new(s.profile.quantile(0.95).max(1.0), opts.leverage_log_bins)?;
            let grid = leverage_grid(&log.records, &axis);
            Some((axis, grid))
        }
        _ => None,
    };

    Ok(MetricReport {
        label: label.to_string(),
        resolution,
        duration: log.duration(),
        n_events: log.records.len(),
        event_counts,
        mean_spread,
        spread_variance: spread.time_weighted_variance(),
        spread_dispersion: spread.index_of_dispersion().ok(),
        spread_pdf: spread.occupation_pmf(),
        regime: TickRegime::classify(mean_spread),
        epsilon_proxy: epsilon_proxy(mean_spread).ok(),
        trades,
        shape,
        sparsity,
        mo_best_ratio,
        leverage,
    })
}

/// Writes summary.json and one CSV per metric into `dir`.
pub fn write_report(report: &MetricReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(report)?)?;

    let mut w = csv::Writer::from_path(dir.join("spread_pdf.csv"))?;
    w.write_record(["spread_ticks", "probability"])?;
    for (s, p) in &report.spread_pdf {
        w.write_record([s.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("mid_changes.csv"))?;
    w.write_record(["abs_change_ticks", "count"])?;
    if let Some(t) = &report.trades {
        for (h, c) in &t.histogram {
            w.write_record([(*h as f64 / 2.0).to_string(), c.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("shape.csv"))?;
    w.write_record(["bin", "offset_ticks", "mass"])?;
    if let Some(s) = &report.shape {
        for (i, m) in s.profile.mass.iter().enumerate() {
            w.write_record([(i + 1).to_string(), crate::shape::bin_centre(i + 1).to_string(), m.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("empty_levels.csv"))?;
    w.write_record(["rank", "empty_levels", "probability"])?;
    if let Some(s) = &report.sparsity {
        for (i, h) in s.empty_levels.iter().enumerate() {
            for (n, p) in h {
                w.write_record([(i + 1).to_string(), n.to_string(), p.to_string()])?;
            }
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("mo_best_ratio.csv"))?;
    w.write_record(["ratio", "density"])?;
    if let Some(r) = &report.mo_best_ratio {
        for (x, d) in &r.density {
            w.write_record([x.to_string(), d.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("leverage.csv"))?;
    w.write_record([
        "from_family", "from_side", "from_lo", "from_hi", "to_family", "to_side", "to_lo", "to_hi", "count", "ratio",
    ])?;
    if let Some((axis, grid)) = &report.leverage {
        let edge = |b: usize| (axis.edges[b].to_string(), axis.edges[b + 1].to_string());
        for t in &grid.transitions {
            let (fl, fh) = edge(t.from.bin);
            let (tl, th) = edge(t.to.bin);
            w.write_record([
                t.from.family.label().to_string(),
                format!("{:?}", t.from.side).to_lowercase(),
                fl,
                fh,
                t.to.family.label().to_string(),
                format!("{:?}", t.to.side).to_lowercase(),
                tl,
                th,
                t.count.to_string(),
                t.ratio.map(|r| r.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back the JSON part of a report.
pub fn read_summary(path: &Path) -> Result<MetricReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| AnalyticsError::Io(format!("{}: {e}", path.display())))
}
