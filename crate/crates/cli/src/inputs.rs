//! Report and calibration over an event log file or LOBSTER data.

use std::path::{Path, PathBuf};

use mqh_analytics::{compute_report, write_report, BookView, EventLog, MetricReport, ReportOptions};
use mqh_calibration::{calibrate, CalibrationOptions, CalibrationResult};
use mqh_io::{classify_lobster, read_event_log_file, write_event_log_file, ClassifyCounters, ClassifyOptions};
use serde::Serialize;

use crate::common::{create_dir, write_json};
use crate::error::{CliError, Result};

#[derive(Clone, Debug)]
pub enum Input {
    /// An event log written by `simulate`.
    Log(PathBuf),
    Lobster { message: PathBuf, orderbook: PathBuf, options: ClassifyOptions },
}

pub struct LoadedInput {
    pub log: EventLog,
    /// Level-resolved books, LOBSTER only.
    pub books: Option<Vec<(BookView, f64)>>,
    pub counters: Option<ClassifyCounters>,
}

pub fn load_input(input: &Input) -> Result<LoadedInput> {
    match input {
        Input::Log(p) => Ok(LoadedInput { log: read_event_log_file(p)?, books: None, counters: None }),
        Input::Lobster { message, orderbook, options } => {
            let ds = classify_lobster(message, orderbook, options)?;
            Ok(LoadedInput { log: ds.log, books: Some(ds.books), counters: Some(ds.counters) })
        }
    }
}

fn write_ingest(loaded: &LoadedInput, out: &Path) -> Result<()> {
    if let Some(c) = &loaded.counters {
        write_json(&out.join("ingest.json"), c)?;
        write_event_log_file(&loaded.log, &out.join("events.csv"))?;
    }
    Ok(())
}

/// Writes the metric files into `out`; LOBSTER inputs also get the
/// classified `events.csv` and the `ingest.json` counters.
pub fn cmd_report(input: &Input, label: &str, opts: &ReportOptions, out: &Path) -> Result<MetricReport> {
    let loaded = load_input(input)?;
    if loaded.log.records.is_empty() {
        return Err(CliError::Usage("the input has no events".into()));
    }
    let report = compute_report(label, &loaded.log, loaded.books.as_deref(), opts)?;
    create_dir(out)?;
    write_report(&report, out)?;
    write_ingest(&loaded, out)?;
    Ok(report)
}

#[derive(Serialize)]
struct CalibrationFile<'a> {
    result: &'a CalibrationResult,
    bin_width: f64,
    min_obs: usize,
    kernels: Option<(f64, usize, f64)>,
}

/// Writes `calibration.json` and the run-config `fragment.json`.
pub fn cmd_calibrate(input: &Input, opts: &CalibrationOptions, out: &Path) -> Result<CalibrationResult> {
    let loaded = load_input(input)?;
    let result = calibrate(&loaded.log, opts)?;
    create_dir(out)?;
    write_json(
        &out.join("calibration.json"),
        &CalibrationFile { result: &result, bin_width: opts.is_fit.bin_width, min_obs: opts.min_obs, kernels: opts.kernels },
    )?;
    write_json(&out.join("fragment.json"), &result.run_config_fragment())?;
    write_ingest(&loaded, out)?;
    Ok(result)
}
