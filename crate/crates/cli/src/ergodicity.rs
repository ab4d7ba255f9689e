//! Runs from several initial books; compares long-run spreads and the
//! distribution of the deep width m_D.

use std::path::Path;

use mqh_analytics::{acf, ks_two_sample, EventLog, WeightedSeries};
use mqh_io::RunConfig;
use serde::{Deserialize, Serialize};

use crate::common::{create_dir, derive_seed, par_map, simulate, write_csv, write_json};
use crate::error::{CliError, Result};

pub const ACF_CUTOFF: f64 = 0.1;
const MAX_ACF_LAG: usize = 600;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityOptions {
    pub s0: Vec<i64>,
    pub m0: Vec<f64>,
    /// Time discarded before long-run statistics.
    pub burn_in: f64,
    /// Bucket length of the trajectory tables.
    pub bucket: f64,
    /// Spacing of the m_D samples fed to the KS tests; when absent, the
    /// first lag at which the mean autocorrelation of m_D drops below
    /// `ACF_CUTOFF`.
    pub ks_spacing: Option<f64>,
    pub jobs: usize,
}

impl Default for ErgodicityOptions {
    fn default() -> Self {
        ErgodicityOptions {
            s0: vec![5, 55, 105],
            m0: vec![0.05, 0.5, 0.95],
            burn_in: 1000.0,
            bucket: 100.0,
            ks_spacing: None,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityRun {
    pub s0: i64,
    pub m0: f64,
    pub seed: u64,
    pub events: u64,
    /// Time-weighted mean spread after the burn-in.
    pub long_run_mean_spread: f64,
    pub mean_spread: f64,
    pub mean_deep_width: f64,
    #[serde(skip)]
    pub deep_width_samples: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub m0_a: f64,
    pub m0_b: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityResult {
    pub options: ErgodicityOptions,
    pub base_seed: u64,
    pub horizon: f64,
    pub runs: Vec<ErgodicityRun>,
    /// Long-run mean spread per s0, averaged over the m0 runs.
    pub spread_by_s0: Vec<(i64, f64)>,
    /// (max − min) / mean of `spread_by_s0`; None for a single s0.
    pub spread_relative_range: Option<f64>,
    /// Spacing in seconds actually used for the KS samples.
    pub ks_spacing: f64,
    pub ks: Vec<KsRow>,
    pub min_ks_p_value: Option<f64>,
}

/// Ask-side deep width sampled every `spacing` seconds from `from` on.
fn sample_deep_width(log: &EventLog, from: f64, spacing: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = from;
    for seg in log.segments() {
        let end = seg.start + seg.duration;
        while t < end && t <= log.end {
            if t >= seg.start {
                out.push(seg.ask.m_deep as f64);
            }
            t += spacing;
        }
    }
    out
}

/// First lag (s) where the run-averaged autocorrelation of the 1 s m_D
/// samples falls below `ACF_CUTOFF`.
fn decorrelation_lag(runs: &[ErgodicityRun]) -> f64 {
    let mut sum = vec![0.0; MAX_ACF_LAG + 1];
    let mut n = 0;
    for r in runs {
        let lags = MAX_ACF_LAG.min(r.deep_width_samples.len().saturating_sub(2));
        if lags == 0 {
            continue;
        }
        if let Ok(a) = acf(&r.deep_width_samples, lags) {
            for (k, v) in a.values.iter().enumerate() {
                sum[k] += if v.is_finite() { *v } else { 0.0 };
            }
            n += 1;
        }
    }
    if n == 0 {
        return 1.0;
    }
    (1..=MAX_ACF_LAG).find(|&k| sum[k] / (n as f64) < ACF_CUTOFF).unwrap_or(MAX_ACF_LAG) as f64
}

fn window_mean(log: &EventLog, from: f64) -> f64 {
    let (mut area, mut len) = (0.0, 0.0);
    for seg in log.segments() {
        let a = seg.start.max(from);
        let b = seg.start + seg.duration;
        if b > a {
            area += seg.spread_ticks() as f64 * (b - a);
            len += b - a;
        }
    }
    if len > 0.0 {
        area / len
    } else {
        f64::NAN
    }
}

fn one_run(cfg: &RunConfig, s0: i64, m0: f64, seed: u64, opts: &ErgodicityOptions) -> Result<ErgodicityRun> {
    let mut c = cfg.clone();
    c.init.s0 = s0;
    c.init.m0_deep = m0;
    c.run.seed = seed;
    let (log, out) = simulate(&c)?;
    let spread = log.spread_series()?;
    let width = WeightedSeries::from_steps(
        std::iter::once((log.start, log.initial.ask.m_deep as f64))
            .chain(log.records.iter().map(|r| (r.time, r.ask.m_deep as f64))),
        log.end,
    )?;
    let s_b = spread.bucket_means(opts.bucket)?;
    let m_b = width.bucket_means(opts.bucket)?;
    let trajectory = s_b.iter().zip(&m_b).map(|(s, m)| (s.0, s.1, m.1)).collect();
    // 1 s grid; thinned to the KS spacing once all runs are in
    let samples = sample_deep_width(&log, opts.burn_in, 1.0);
    Ok(ErgodicityRun {
        s0,
        m0,
        seed,
        events: out.stats.events,
        long_run_mean_spread: window_mean(&log, opts.burn_in),
        mean_spread: out.stats.mean_spread,
        mean_deep_width: samples.iter().sum::<f64>() / samples.len().max(1) as f64,
        deep_width_samples: samples,
        trajectory,
    })
}

/// Runs the full s0 × m0 product, each cell with its own derived seed.
pub fn run_ergodicity(cfg: &RunConfig, opts: &ErgodicityOptions) -> Result<ErgodicityResult> {
    if opts.s0.is_empty() || opts.m0.is_empty() {
        return Err(CliError::Usage("need at least one s0 and one m0".into()));
    }
    if !(opts.burn_in >= 0.0 && opts.burn_in < cfg.run.horizon) {
        return Err(CliError::Usage(format!("burn-in {} must lie in [0, horizon)", opts.burn_in)));
    }
    if !(opts.bucket > 0.0 && opts.ks_spacing.is_none_or(|v| v >= 1.0)) {
        return Err(CliError::Usage("bucket must be positive and ks spacing at least 1 s".into()));
    }
    let cells: Vec<(i64, f64, u64)> = opts
        .s0
        .iter()
        .flat_map(|&s| opts.m0.iter().map(move |&m| (s, m)))
        .enumerate()
        .map(|(i, (s, m))| (s, m, derive_seed(cfg.run.seed, i as u64)))
        .collect();
    let mut runs = par_map(opts.jobs, &cells, |&(s, m, seed)| one_run(cfg, s, m, seed, opts))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ks_spacing = match opts.ks_spacing {
        Some(v) => v,
        None => decorrelation_lag(&runs),
    };
    let stride = ks_spacing.round().max(1.0) as usize;
    for r in &mut runs {
        r.deep_width_samples = r.deep_width_samples.iter().step_by(stride).copied().collect();
    }

    // spreads are compared per s0 averaged over the m0 replicates, deep
    // widths per m0 pooled over the s0 replicates
    let spread_by_s0: Vec<(i64, f64)> = opts
        .s0
        .iter()
        .map(|&s0| {
            let v: Vec<f64> = runs.iter().filter(|r| r.s0 == s0).map(|r| r.long_run_mean_spread).collect();
            (s0, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let spread_relative_range = (spread_by_s0.len() > 1).then(|| {
        let m: Vec<f64> = spread_by_s0.iter().map(|x| x.1).collect();
        let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (hi - lo) / (m.iter().sum::<f64>() / m.len() as f64)
    });

    let pooled: Vec<(f64, Vec<f64>)> = opts
        .m0
        .iter()
        .map(|&m0| (m0, runs.iter().filter(|r| r.m0 == m0).flat_map(|r| r.deep_width_samples.iter().copied()).collect()))
        .collect();
    let mut ks = Vec::new();
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            let r = ks_two_sample(&pooled[i].1, &pooled[j].1)?;
            ks.push(KsRow {
                m0_a: pooled[i].0,
                m0_b: pooled[j].0,
                statistic: r.statistic,
                p_value: r.p_value,
                n_a: r.n1,
                n_b: r.n2,
            });
        }
    }
    let min_ks_p_value = ks.iter().map(|k| k.p_value).reduce(f64::min);
    Ok(ErgodicityResult {
        options: opts.clone(),
        base_seed: cfg.run.seed,
        horizon: cfg.run.horizon,
        runs,
        spread_by_s0,
        spread_relative_range,
        ks_spacing,
        ks,
        min_ks_p_value,
    })
}

/// Writes `ergodicity.json`, `runs.csv`, `trajectories.csv` and `ks.csv`.
pub fn cmd_ergodicity(cfg: &RunConfig, opts: &ErgodicityOptions, out: &Path) -> Result<ErgodicityResult> {
    let res = run_ergodicity(cfg, opts)?;
    create_dir(out)?;
    write_json(&out.join("ergodicity.json"), &res)?;
    write_csv(
        &out.join("runs.csv"),
        &["s0", "m0", "seed", "events", "long_run_mean_spread", "mean_spread", "mean_deep_width"],
        res.runs.iter().map(|r| {
            [
                r.s0.to_string(),
                r.m0.to_string(),
                r.seed.to_string(),
                r.events.to_string(),
                r.long_run_mean_spread.to_string(),
                r.mean_spread.to_string(),
                r.mean_deep_width.to_string(),
            ]
        }),
    )?;
    write_csv(
        &out.join("trajectories.csv"),
        &["s0", "m0", "bucket_start", "mean_spread", "mean_deep_width"],
        res.runs.iter().flat_map(|r| {
            r.trajectory.iter().map(move |&(t, s, m)| [r.s0.to_string(), r.m0.to_string(), t.to_string(), s.to_string(), m.to_string()])
        }),
    )?;
    write_csv(
        &out.join("ks.csv"),
        &["m0_a", "m0_b", "statistic", "p_value", "n_a", "n_b"],
        res.ks.iter().map(|k| {
            [
                k.m0_a.to_string(),
                k.m0_b.to_string(),
                k.statistic.to_string(),
                k.p_value.to_string(),
                k.n_a.to_string(),
                k.n_b.to_string(),
            ]
        }),
    )?;
    Ok(res)
}
