//! One simulation with every artifact: event log, snapshots, report.

use std::collections::BTreeMap;
use std::path::Path;

use mqh_analytics::{compute_report, write_report, ReportOptions};
use mqh_core::EventType;
use mqh_io::{write_event_log_file, write_run_config, write_snapshots, RunConfig};
use serde::{Deserialize, Serialize};

use crate::common::{create_dir, simulate, write_json};
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub seed: u64,
    pub horizon: f64,
    pub events: u64,
    pub mean_spread: f64,
    pub max_spread: i64,
    pub counts: BTreeMap<String, u64>,
    pub volume_added: i64,
    pub volume_removed: i64,
    pub volume_purged: i64,
    pub volume_replenished: i64,
}

/// Writes `config.json`, `events.csv`, `snapshots.jsonl`, `summary.json` and
/// `report/` into `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateSummary> {
    let (log, output) = simulate(cfg)?;
    create_dir(out)?;
    write_run_config(cfg, &out.join("config.json"))?;
    write_event_log_file(&log, &out.join("events.csv"))?;
    let snaps = std::fs::File::create(out.join("snapshots.jsonl"))?;
    write_snapshots(&output.snapshots, snaps)?;

    let stats = &output.stats;
    let summary = SimulateSummary {
        seed: cfg.run.seed,
        horizon: cfg.run.horizon,
        events: stats.events,
        mean_spread: stats.mean_spread,
        max_spread: stats.max_spread,
        counts: EventType::ALL.iter().map(|e| (e.label().to_string(), stats.counts[e.index()])).collect(),
        volume_added: stats.ledger.added,
        volume_removed: stats.ledger.removed,
        volume_purged: stats.ledger.purged,
        volume_replenished: stats.ledger.replenished,
    };
    write_json(&out.join("summary.json"), &summary)?;
    if log.records.is_empty() {
        return Err(CliError::Runtime("the run produced no events".into()));
    }
    let report = compute_report("simulated", &log, None, &ReportOptions::default())?;
    write_report(&report, &out.join("report"))?;
    Ok(summary)
}
