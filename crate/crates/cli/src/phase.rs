//! Tick-size regime over an (α, β) grid, with the calibrated asset points
//! overlaid.

use std::path::Path;

use mqh_analytics::{spearman, TickRegime};
use mqh_io::RunConfig;
use serde::{Deserialize, Serialize};

use crate::common::{create_dir, derive_seed, median, opt, par_map, simulate, with_alpha_beta, write_csv, write_json};
use crate::error::{CliError, Result};

/// One calibrated asset: (name, α, β, η̂, regime by relative tick size).
pub type AssetPoint = (&'static str, f64, f64, f64, TickRegime);

/// Calibrated (α, β, η̂) of the studied assets.
pub const CALIBRATED_ASSETS: [AssetPoint; 15] = [
    ("SIRI", 0.0102, 0.98, 0.99, TickRegime::Large),
    ("BAC", 0.0103, 0.49, 0.98, TickRegime::Large),
    ("INTC", 0.0130, 0.94, 0.98, TickRegime::Large),
    ("CSCO", 0.0250, 0.60, 0.99, TickRegime::Large),
    ("ORCL", 0.0190, 0.18, 0.97, TickRegime::Large),
    // placed in the large-tick column of the calibration table, medium-tick by ε
    ("MSFT", 0.0230, 0.19, 0.98, TickRegime::Medium),
    ("ABBV", 0.0440, 0.46, 0.79, TickRegime::Medium),
    ("PM", 0.2750, 0.35, 0.77, TickRegime::Medium),
    ("AAPL", 0.1350, 0.59, 0.92, TickRegime::Medium),
    ("IBM", 0.2350, 0.59, 0.71, TickRegime::Medium),
    ("TSLA", 1.3610, 0.48, 0.19, TickRegime::Small),
    ("CHTR", 1.4100, 0.41, 0.15, TickRegime::Small),
    ("AMZN", 1.9630, 0.41, 0.09, TickRegime::Small),
    ("GOOG", 3.2670, 0.50, 0.09, TickRegime::Small),
    ("BKNG", 3.7410, 0.46, 0.03, TickRegime::Small),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub seeds: usize,
    pub overlay: bool,
    pub jobs: usize,
}

impl PhaseOptions {
    /// `n` values of α log-spaced over [0.01, 4] and β linear over [0.2, 1].
    pub fn default_grid(n: usize) -> Self {
        let n = n.max(1);
        let t = |i: usize| if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
        PhaseOptions {
            alphas: (0..n).map(|i| round4((0.01f64.ln() + t(i) * (4.0f64.ln() - 0.01f64.ln())).exp())).collect(),
            betas: (0..n).map(|i| round4(0.2 + 0.8 * t(i))).collect(),
            seeds: 3,
            overlay: true,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub alpha: f64,
    pub beta: f64,
    pub mean_spreads: Vec<f64>,
    pub median_spread: Option<f64>,
    pub regime: Option<TickRegime>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    pub asset: String,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub asset_regime: TickRegime,
    pub median_spread: Option<f64>,
    pub regime: Option<TickRegime>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub options: PhaseOptions,
    pub base_seed: u64,
    pub horizon: f64,
    pub cells: Vec<PhaseCell>,
    /// Spearman ρ between α and the median spread for each β.
    pub row_spearman: Vec<(f64, Option<f64>)>,
    pub overlay: Vec<OverlayPoint>,
}

/// Median mean spread over `seeds` runs at (α, β).
fn cell(cfg: &RunConfig, alpha: f64, beta: f64, seeds: &[u64]) -> PhaseCell {
    let mut spreads = Vec::new();
    let mut error = None;
    for &seed in seeds {
        let mut c = with_alpha_beta(cfg, alpha, beta);
        c.run.seed = seed;
        match simulate(&c) {
            Ok((_, out)) => spreads.push(out.stats.mean_spread),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let median_spread = if error.is_none() { median(&spreads) } else { None };
    PhaseCell { alpha, beta, mean_spreads: spreads, median_spread, regime: median_spread.map(TickRegime::classify), error }
}

pub fn run_phase_diagram(cfg: &RunConfig, opts: &PhaseOptions) -> Result<PhaseResult> {
    if opts.alphas.is_empty() || opts.betas.is_empty() {
        return Err(CliError::Usage("the alpha and beta grids must be non-empty".into()));
    }
    if opts.seeds == 0 {
        return Err(CliError::Usage("need at least one seed per cell".into()));
    }
    if opts.alphas.iter().chain(&opts.betas).any(|v| !(*v > 0.0)) {
        return Err(CliError::Usage("grid values must be positive".into()));
    }
    let mut jobs: Vec<(f64, f64, Vec<u64>)> = Vec::new();
    for &b in &opts.betas {
        for &a in &opts.alphas {
            let k = jobs.len() as u64;
            jobs.push((a, b, (0..opts.seeds as u64).map(|s| derive_seed(cfg.run.seed, k * 1000 + s)).collect()));
        }
    }
    let n_grid = jobs.len();
    if opts.overlay {
        for (i, p) in CALIBRATED_ASSETS.iter().enumerate() {
            let k = (n_grid + i) as u64;
            jobs.push((p.1, p.2, (0..opts.seeds as u64).map(|s| derive_seed(cfg.run.seed, k * 1000 + s)).collect()));
        }
    }
    let mut done = par_map(opts.jobs, &jobs, |(a, b, seeds)| cell(cfg, *a, *b, seeds))?;
    let overlay_cells = done.split_off(n_grid);
    let cells = done;

    let row_spearman = opts
        .betas
        .iter()
        .map(|&b| {
            let row: Vec<&PhaseCell> = cells.iter().filter(|c| c.beta == b).collect();
            let ok: Vec<(f64, f64)> = row.iter().filter_map(|c| c.median_spread.map(|s| (c.alpha, s))).collect();
            let rho = if ok.len() >= 2 && ok.len() == row.len() {
                let (x, y): (Vec<f64>, Vec<f64>) = ok.into_iter().unzip();
                spearman(&x, &y).ok()
            } else {
                None
            };
            (b, rho)
        })
        .collect();

    let overlay = CALIBRATED_ASSETS
        .iter()
        .zip(overlay_cells)
        .map(|(p, c)| OverlayPoint {
            asset: p.0.to_string(),
            alpha: p.1,
            beta: p.2,
            eta: p.3,
            asset_regime: p.4,
            median_spread: c.median_spread,
            regime: c.regime,
        })
        .collect();
    Ok(PhaseResult { options: opts.clone(), base_seed: cfg.run.seed, horizon: cfg.run.horizon, cells, row_spearman, overlay })
}

fn regime_text(r: Option<TickRegime>) -> String {
    match r {
        Some(TickRegime::Large) => "large".into(),
        Some(TickRegime::Medium) => "medium".into(),
        Some(TickRegime::Small) => "small".into(),
        None => "failed".into(),
    }
}

/// Writes `phase.json`, `phase.csv` (heat map) and `overlay.csv`.
pub fn cmd_phase_diagram(cfg: &RunConfig, opts: &PhaseOptions, out: &Path) -> Result<PhaseResult> {
    let res = run_phase_diagram(cfg, opts)?;
    create_dir(out)?;
    write_json(&out.join("phase.json"), &res)?;
    write_csv(
        &out.join("phase.csv"),
        &["alpha", "beta", "seeds", "horizon", "median_mean_spread", "regime", "error"],
        res.cells.iter().map(|c| {
            [
                c.alpha.to_string(),
                c.beta.to_string(),
                opts.seeds.to_string(),
                res.horizon.to_string(),
                opt(c.median_spread),
                regime_text(c.regime),
                c.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    write_csv(
        &out.join("overlay.csv"),
        &["asset", "alpha", "beta", "eta", "asset_regime", "median_mean_spread", "regime"],
        res.overlay.iter().map(|p| {
            [
                p.asset.clone(),
                p.alpha.to_string(),
                p.beta.to_string(),
                p.eta.to_string(),
                regime_text(Some(p.asset_regime)),
                opt(p.median_spread),
                regime_text(p.regime),
            ]
        }),
    )?;
    Ok(res)
}

/// Four significant digits, so grid values print cleanly.
fn round4(x: f64) -> f64 {
    format!("{x:.3e}").parse().unwrap_or(x)
}
