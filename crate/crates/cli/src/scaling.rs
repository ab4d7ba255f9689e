//! Scaling of stylized facts with the simulated relative tick size.

use std::path::Path;

use mqh_analytics::{compute_report, loglog_slope, spearman, LogLogFit, ReportOptions, TickRegime};
use mqh_io::RunConfig;
use serde::{Deserialize, Serialize};

use crate::common::{
    create_dir, derive_seed, median, opt, par_map, simulate, with_alpha_beta, with_eta, write_csv, write_json,
};
use crate::error::{CliError, Result};

/// (metric, simulated slope, empirical slope) reported for comparison.
pub const REFERENCE_SLOPES: [(&str, f64, f64); 3] =
    [("index_of_dispersion", -1.43, -1.36), ("mean_mid_change", -1.05, -0.95), ("shape_argmax", -1.57, -1.50)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    /// (α, β, η) per grid point.
    pub points: Vec<(f64, f64, f64)>,
    pub seeds: usize,
    pub jobs: usize,
}

/// Calibrated (α, β, η) of the medium and small tick assets.
const CALIBRATED_PATH: [(f64, f64, f64); 9] = [
    (0.044, 0.46, 0.79),
    (0.135, 0.59, 0.92),
    (0.235, 0.59, 0.71),
    (0.275, 0.35, 0.77),
    (1.361, 0.48, 0.19),
    (1.41, 0.41, 0.15),
    (1.963, 0.41, 0.09),
    (3.267, 0.5, 0.09),
    (3.741, 0.46, 0.03),
];

impl ScalingOptions {
    /// The calibrated medium and small tick points plus, between each
    /// consecutive pair, the geometric mean of α with β and η averaged.
    pub fn calibrated_path() -> Self {
        let mut points = CALIBRATED_PATH.to_vec();
        for w in CALIBRATED_PATH.windows(2) {
            let (a, b) = (w[0], w[1]);
            points.push(((a.0 * b.0).sqrt(), (a.1 + b.1) / 2.0, (a.2 + b.2) / 2.0));
        }
        ScalingOptions { points, seeds: 3, jobs: 0 }
    }

    /// Cartesian product of the three lists.
    pub fn product(alphas: &[f64], betas: &[f64], etas: &[f64]) -> Self {
        let mut points = Vec::new();
        for &a in alphas {
            for &b in betas {
                for &e in etas {
                    points.push((a, b, e));
                }
            }
        }
        ScalingOptions { points, seeds: 1, jobs: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub mean_spread: Option<f64>,
    pub regime: Option<TickRegime>,
    pub epsilon_proxy: Option<f64>,
    pub dispersion: Option<f64>,
    pub mean_mid_change: Option<f64>,
    pub shape_argmax: Option<f64>,
    pub wasserstein: Option<f64>,
    /// Used in the regressions: small or medium tick with every metric present.
    pub included: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub metric: String,
    pub fit: LogLogFit,
    pub reference_simulated: f64,
    pub reference_empirical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub options: ScalingOptions,
    pub base_seed: u64,
    pub horizon: f64,
    pub points: Vec<ScalingPoint>,
    pub slopes: Vec<SlopeRow>,
    /// Spearman ρ between ε proxy and Wasserstein sparsity.
    pub sparsity_spearman: Option<f64>,
}

#[derive(Default)]
struct Metrics {
    spread: Vec<f64>,
    dispersion: Vec<f64>,
    mid: Vec<f64>,
    argmax: Vec<f64>,
    wass: Vec<f64>,
}

fn point(cfg: &RunConfig, (alpha, beta, eta): (f64, f64, f64), seeds: &[u64]) -> ScalingPoint {
    let mut m = Metrics::default();
    let mut error = None;
    for &seed in seeds {
        let mut run = || -> Result<()> {
            let mut c = with_eta(&with_alpha_beta(cfg, alpha, beta), eta)?;
            c.run.seed = seed;
            let (log, _) = simulate(&c)?;
            let opts = ReportOptions { leverage: false, ..ReportOptions::default() };
            let r = compute_report("scaling", &log, None, &opts)?;
            m.spread.push(r.mean_spread);
            m.dispersion.extend(r.spread_dispersion);
            m.mid.extend(r.trades.as_ref().map(|t| t.mean_ticks));
            m.argmax.extend(r.shape.as_ref().map(|s| s.argmax));
            m.wass.extend(r.sparsity.as_ref().map(|s| s.wasserstein_mean));
            Ok(())
        };
        if let Err(e) = run() {
            error = Some(e.to_string());
            break;
        }
    }
    let mean_spread = median(&m.spread);
    let regime = mean_spread.map(TickRegime::classify);
    let epsilon_proxy = mean_spread.and_then(|s| mqh_analytics::epsilon_proxy(s).ok());
    let (dispersion, mean_mid_change, shape_argmax, wasserstein) =
        (median(&m.dispersion), median(&m.mid), median(&m.argmax), median(&m.wass));
    let included = error.is_none()
        && matches!(regime, Some(TickRegime::Medium | TickRegime::Small))
        && [epsilon_proxy, dispersion, mean_mid_change, shape_argmax].iter().all(|v| v.is_some_and(|x| x > 0.0));
    ScalingPoint {
        alpha,
        beta,
        eta,
        mean_spread,
        regime,
        epsilon_proxy,
        dispersion,
        mean_mid_change,
        shape_argmax,
        wasserstein,
        included,
        error,
    }
}

pub fn run_scaling(cfg: &RunConfig, opts: &ScalingOptions) -> Result<ScalingResult> {
    if opts.points.is_empty() || opts.seeds == 0 {
        return Err(CliError::Usage("the scaling grid and seed count must be non-empty".into()));
    }
    let jobs: Vec<((f64, f64, f64), Vec<u64>)> = opts
        .points
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, (0..opts.seeds as u64).map(|s| derive_seed(cfg.run.seed, k as u64 * 1000 + s)).collect()))
        .collect();
    let points = par_map(opts.jobs, &jobs, |(p, seeds)| point(cfg, *p, seeds))?;

    let used: Vec<&ScalingPoint> = points.iter().filter(|p| p.included).collect();
    if used.len() < 2 {
        return Err(CliError::Runtime(format!(
            "only {} grid point(s) reached the small or medium tick regime; the regressions need at least 2",
            used.len()
        )));
    }
    let eps: Vec<f64> = used.iter().map(|p| p.epsilon_proxy.unwrap()).collect();
    let series: [Vec<f64>; 3] = [
        used.iter().map(|p| p.dispersion.unwrap()).collect(),
        used.iter().map(|p| p.mean_mid_change.unwrap()).collect(),
        used.iter().map(|p| p.shape_argmax.unwrap()).collect(),
    ];
    let mut slopes = Vec::new();
    for ((name, sim, emp), y) in REFERENCE_SLOPES.iter().zip(&series) {
        slopes.push(SlopeRow {
            metric: name.to_string(),
            fit: loglog_slope(&eps, y)?,
            reference_simulated: *sim,
            reference_empirical: *emp,
        });
    }
    let with_w: Vec<(f64, f64)> = used.iter().filter_map(|p| p.wasserstein.map(|w| (p.epsilon_proxy.unwrap(), w))).collect();
    let sparsity_spearman = (with_w.len() >= 2)
        .then(|| {
            let (x, y): (Vec<f64>, Vec<f64>) = with_w.into_iter().unzip();
            spearman(&x, &y).ok()
        })
        .flatten();
    Ok(ScalingResult {
        options: opts.clone(),
        base_seed: cfg.run.seed,
        horizon: cfg.run.horizon,
        points,
        slopes,
        sparsity_spearman,
    })
}

/// Writes `scaling.json`, `points.csv` and `slopes.csv`.
pub fn cmd_scaling(cfg: &RunConfig, opts: &ScalingOptions, out: &Path) -> Result<ScalingResult> {
    let res = run_scaling(cfg, opts)?;
    create_dir(out)?;
    write_json(&out.join("scaling.json"), &res)?;
    write_csv(
        &out.join("points.csv"),
        &[
            "alpha", "beta", "eta", "mean_spread", "epsilon_proxy", "dispersion", "mean_mid_change", "shape_argmax",
            "wasserstein", "included",
        ],
        res.points.iter().map(|p| {
            [
                p.alpha.to_string(),
                p.beta.to_string(),
                p.eta.to_string(),
                opt(p.mean_spread),
                opt(p.epsilon_proxy),
                opt(p.dispersion),
                opt(p.mean_mid_change),
                opt(p.shape_argmax),
                opt(p.wasserstein),
                p.included.to_string(),
            ]
        }),
    )?;
    write_csv(
        &out.join("slopes.csv"),
        &["metric", "slope", "intercept", "r2", "n", "reference_simulated", "reference_empirical"],
        res.slopes.iter().map(|s| {
            [
                s.metric.clone(),
                s.fit.slope.to_string(),
                s.fit.intercept.to_string(),
                s.fit.r2.to_string(),
                s.fit.n.to_string(),
                s.reference_simulated.to_string(),
                s.reference_empirical.to_string(),
            ]
        }),
    )?;
    Ok(res)
}
