//! Helpers shared by the commands: config loading, seeded runs, parallel
//! sweeps and file output.

use std::fs;
use std::path::Path;

use mqh_analytics::EventLog;
use mqh_dynamics::{run_simulation, SimulationOutput};
use mqh_io::{read_run_config, reference_config, HandlersConfig, RunConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Loads `path`, or the built-in reference configuration when absent.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(read_run_config(p)?),
        None => Ok(reference_config()),
    }
}

pub fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>, horizon: Option<f64>) {
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(h) = horizon {
        cfg.run.horizon = h;
    }
}

/// Independent seed for sweep cell `index` of a run seeded with `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one simulation and wraps its records into a log over [0, horizon].
pub fn simulate(cfg: &RunConfig) -> Result<(EventLog, SimulationOutput)> {
    let run = cfg.resolve()?;
    let mut out = run_simulation(&run.spec, &run.handlers, &run.init, &run.settings)?;
    let log = EventLog {
        start: 0.0,
        end: run.settings.horizon,
        tick_size: cfg.hawkes.tick_size,
        m_half_depth: run.settings.m_half_depth,
        initial: out.initial,
        records: std::mem::take(&mut out.records),
    };
    Ok((log, out))
}

pub fn with_alpha_beta(cfg: &RunConfig, alpha: f64, beta: f64) -> RunConfig {
    let mut c = cfg.clone();
    c.hawkes.is_alpha = alpha;
    c.hawkes.is_beta = beta;
    c
}

/// Sets all three offset parameters to `eta`.
pub fn with_eta(cfg: &RunConfig, eta: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    match &mut c.handlers {
        HandlersConfig::Standard { eta: e, .. } => *e = [eta; 3],
        HandlersConfig::Full(_) => {
            return Err(CliError::Usage("an eta sweep needs `standard` handlers in the config".into()));
        }
    }
    Ok(c)
}

/// Maps `f` over `items` on `jobs` threads (0 = all cores), keeping order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Text form of an optional number; empty when missing.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
