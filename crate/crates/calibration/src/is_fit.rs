//! In-spread intensity as a power law of the spread: λ_IS = λ₀ (δ (s − 1) / α)^β.

use mqh_analytics::EventLog;
use mqh_core::MetaQueue;
use mqh_hawkes::{EventHistory, Spec};
use serde::{Deserialize, Serialize};

use crate::error::{CalibrationError, Result};

pub const DEFAULT_BIN_WIDTH: f64 = 0.01;
pub const DEFAULT_MIN_BINS: usize = 100;

/// Where the intensity at multiplier 1 comes from.
#[derive(Clone, Debug)]
pub enum Baseline {
    /// A fixed per-side rate.
    Given(f64),
    /// μ_IS plus the excitation replayed from the log under this spec,
    /// evaluated at every bin.
    FromSpec(Box<Spec>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadLevel {
    pub spread: i64,
    pub bins: usize,
    pub is_count: u64,
    /// Per-side IS rate over the bins with this spread, divided by the
    /// baseline.
    pub normalized_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsFit {
    pub alpha: f64,
    pub beta: f64,
    pub intercept: f64,
    pub beta_std_err: f64,
    pub r2: f64,
    /// Mean per-side baseline intensity used to split the intercept.
    pub lambda0: f64,
    pub bin_width: f64,
    pub levels: Vec<SpreadLevel>,
}

#[derive(Clone, Debug)]
pub struct IsFitOptions {
    pub bin_width: f64,
    /// Spread levels with fewer bins are left out.
    pub min_bins: usize,
    pub baseline: Baseline,
}

impl IsFitOptions {
    pub fn new(baseline: Baseline) -> Self {
        IsFitOptions { bin_width: DEFAULT_BIN_WIDTH, min_bins: DEFAULT_MIN_BINS, baseline }
    }
}

/// Counts IS arrivals per bin, assigns each bin the spread in force at its
/// start, pools bins by spread (spread 1 excluded) and regresses the log rate
/// on log(s − 1) with occupancy weights.
pub fn calibrate_is_power_law(log: &EventLog, opts: &IsFitOptions) -> Result<IsFit> {
    log.validate()?;
    let w = opts.bin_width;
    if !(w > 0.0) {
        return Err(CalibrationError::Domain(format!("bin width must be positive, got {w}")));
    }
    let n_bins = ((log.duration() / w).floor() as usize).max(1);
    let mut history = match &opts.baseline {
        Baseline::FromSpec(spec) => Some((EventHistory::new(spec.as_ref()), spec.as_ref())),
        Baseline::Given(v) if !(*v > 0.0) => {
            return Err(CalibrationError::Domain(format!("baseline rate must be positive, got {v}")));
        }
        Baseline::Given(_) => None,
    };

    // per spread: (bins, IS count, Σ baseline)
    let mut acc: std::collections::BTreeMap<i64, (usize, u64, f64)> = Default::default();
    let mut baseline_sum = 0.0;
    let mut idx = 0;
    let recs = &log.records;
    let mut spread = log.initial.spread_ticks();
    for b in 0..n_bins {
        let t0 = log.start + b as f64 * w;
        let t1 = t0 + w;
        // events strictly before the bin set the prevailing spread
        while idx < recs.len() && recs[idx].time < t0 {
            if let Some((h, _)) = history.as_mut() {
                h.push(recs[idx].event_type, recs[idx].time)?;
            }
            spread = recs[idx].spread_after();
            idx += 1;
        }
        let base = match (&mut history, &opts.baseline) {
            (Some((h, spec)), _) => {
                let exc = h.excitation(t0)?;
                let (a, bid) = (mqh_core::EventType::LoAskInSpread.index(), mqh_core::EventType::LoBidInSpread.index());
                ((spec.mu[a] + exc[a]).max(0.0) + (spec.mu[bid] + exc[bid]).max(0.0)) / 2.0
            }
            (None, Baseline::Given(v)) => *v,
            (None, Baseline::FromSpec(_)) => unreachable!(),
        };
        baseline_sum += base;
        let mut count = 0;
        let mut j = idx;
        while j < recs.len() && recs[j].time < t1 {
            if recs[j].event_type.queue() == MetaQueue::InSpread {
                count += 1;
            }
            j += 1;
        }
        let e = acc.entry(spread).or_insert((0, 0, 0.0));
        e.0 += 1;
        e.1 += count;
        e.2 += base;
    }

    let mut levels = Vec::new();
    for (&s, &(bins, count, base)) in &acc {
        if s <= 1 || bins < opts.min_bins || count == 0 || base <= 0.0 {
            continue;
        }
        // two sides share the count
        let rate = count as f64 / 2.0 / (base * w);
        levels.push(SpreadLevel { spread: s, bins, is_count: count, normalized_rate: rate });
    }
    if levels.len() < 3 {
        return Err(CalibrationError::InsufficientVariation(format!(
            "need IS arrivals at 3 or more spread levels above 1 tick with {} bins each, found {}",
            opts.min_bins,
            levels.len()
        )));
    }
    let x: Vec<f64> = levels.iter().map(|l| ((l.spread - 1) as f64).ln()).collect();
    let y: Vec<f64> = levels.iter().map(|l| l.normalized_rate.ln()).collect();
    let wts: Vec<f64> = levels.iter().map(|l| l.bins as f64).collect();
    let (beta, intercept, se, r2) = weighted_fit(&x, &y, &wts)?;
    if !(beta > 0.0) {
        return Err(CalibrationError::Domain(format!("fitted exponent {beta} is not positive")));
    }
    let lambda0 = baseline_sum / n_bins as f64;
    // the rates are already divided by the baseline, so the intercept is β ln(δ / α)
    let alpha = log.tick_size * (-intercept / beta).exp();
    Ok(IsFit { alpha, beta, intercept, beta_std_err: se, r2, lambda0, bin_width: w, levels })
}

/// α from an intercept of the raw (not normalized) log rate and a baseline.
pub fn alpha_from_intercept(tick_size: f64, intercept: f64, lambda0: f64, beta: f64) -> f64 {
    tick_size * (-(intercept - lambda0.ln()) / beta).exp()
}

/// Weighted least squares: (slope, intercept, slope standard error, weighted r²).
fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(b, w)| b * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, w)| w * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, b), w)| w * (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().zip(w).map(|(b, w)| w * (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(CalibrationError::InsufficientVariation("spread levels do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).zip(w).map(|((a, b), w)| w * (b - intercept - slope * a).powi(2)).sum();
    let n = x.len() as f64;
    // weights are occupancy counts; normalize them to the number of levels
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok((slope, intercept, se, r2))
}
