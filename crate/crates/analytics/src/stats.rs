//! Regression, correlation and two-sample tests used by the reports.

use mqh_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares of ln y on ln x.
pub fn loglog_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(AnalyticsError::Domain(format!("x has {} points, y has {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(AnalyticsError::Insufficient(format!("a regression needs 2 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(AnalyticsError::Domain("log-log regression needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.to_f64_lossy().ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.to_f64_lossy().ln()).collect();
    let (slope, intercept, r2) = ols(&lx, &ly)?;
    Ok(LogLogFit { slope, intercept, r2, n: x.len() })
}

/// (slope, intercept, r²) of y on x.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(AnalyticsError::Domain("regressor has no variation".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((slope, my - slope * mx, r2))
}

/// Weighted least squares of y on x; returns (slope, intercept).
pub fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return Err(AnalyticsError::Insufficient("weights sum to zero".into()));
    }
    let mx = x.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(b, w)| b * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, w)| w * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, b), w)| w * (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(AnalyticsError::Domain("regressor has no variation".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Relative tick size proxy k_s / s̄ with k_s = 1. Only defined when the mean
/// spread exceeds one tick.
pub fn epsilon_proxy(mean_spread: f64) -> Result<f64> {
    if !(mean_spread > 1.0) {
        return Err(AnalyticsError::Regime(format!(
            "mean spread {mean_spread} ticks is in the large-tick regime where the proxy is undefined"
        )));
    }
    Ok(1.0 / mean_spread)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Acf {
    /// values[k] is the autocorrelation at lag k (values[0] = 1).
    pub values: Vec<f64>,
    /// Half-width of the 95% band under independence.
    pub band: f64,
}

pub fn acf<T: Scalar>(series: &[T], max_lag: usize) -> Result<Acf> {
    let n = series.len();
    if n <= max_lag + 1 {
        return Err(AnalyticsError::Insufficient(format!("series of {n} points is too short for lag {max_lag}")));
    }
    let x: Vec<f64> = series.iter().map(|v| v.to_f64_lossy()).collect();
    let m = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if c0 <= 0.0 {
        return Err(AnalyticsError::Domain("constant series has no autocorrelation".into()));
    }
    let values = (0..=max_lag)
        .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / c0)
        .collect();
    Ok(Acf { values, band: 1.96 / (n as f64).sqrt() })
}

/// Average ranks (1-based), ties share their mean rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(AnalyticsError::Insufficient("correlation needs two equal-length series of 2+ points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(AnalyticsError::Domain("correlation of a constant series".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * if k as i64 % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-14 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalyticsError::Insufficient("two-sample test needs both samples non-empty".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n1 && j < n2 {
        let x = a[i].min(b[j]);
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let en = (n1 as f64 * n2 as f64 / (n1 + n2) as f64).sqrt();
    let p = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    Ok(KsResult { statistic: d, p_value: p, n1, n2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powf(-1.5)).collect();
        let f = loglog_slope(&x, &y).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let f2 = loglog_slope(&[2.0, 8.0], &[3.0, 12.0]).unwrap();
        assert!((f2.slope - 1.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn rescaling_moves_only_the_intercept() {
        let x = [1.0, 2.0, 5.0, 9.0];
        let y = [3.0, 2.5, 1.1, 0.2];
        let a = loglog_slope(&x, &y).unwrap();
        let b = loglog_slope(&x.map(|v| v * 7.0), &y.map(|v| v * 0.3)).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((a.intercept - b.intercept).abs() > 0.1);
    }

    #[test]
    fn epsilon_proxy_examples() {
        assert_eq!(epsilon_proxy(10.0).unwrap(), 0.1);
        assert!(matches!(epsilon_proxy(1.0), Err(AnalyticsError::Regime(_))));
        assert_eq!(epsilon_proxy(20.0).unwrap() * 2.0, epsilon_proxy(10.0).unwrap());
    }

    #[test]
    fn ranks_and_spearman() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 90.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[9.0, 5.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|v| v as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = a.iter().map(|v| v + 200.0).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert!((r.statistic - 0.4).abs() < 1e-12);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn constant_series_has_no_acf() {
        assert!(acf(&[1.0; 50], 3).is_err());
        assert!(acf(&[1.0, 2.0], 3).is_err());
    }
}
