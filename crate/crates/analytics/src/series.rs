//! Piecewise-constant time series and their time-weighted moments.

use std::collections::BTreeMap;

use mqh_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticsError, Result};

/// Value `values[i]` holds on `[breakpoints[i], breakpoints[i + 1])`, the last
/// one up to `end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WeightedSeries<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    end: T,
}

impl<T: Scalar> WeightedSeries<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>, end: T) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(AnalyticsError::Domain(format!(
                "need as many breakpoints as values, at least one (got {} and {})",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(AnalyticsError::Domain("breakpoints must be strictly increasing".into()));
        }
        if !(end > *breakpoints.last().unwrap()) {
            return Err(AnalyticsError::Domain("series must end after its last breakpoint".into()));
        }
        Ok(WeightedSeries { breakpoints, values, end })
    }

    /// Builds a series from possibly repeated step times; of several steps at
    /// the same time only the last one is kept.
    pub fn from_steps<I: IntoIterator<Item = (T, T)>>(steps: I, end: T) -> Result<Self> {
        let mut bp: Vec<T> = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        for (t, v) in steps {
            if let Some(&last) = bp.last() {
                if t < last {
                    return Err(AnalyticsError::Domain(format!("step time {t} before {last}")));
                }
                if t == last {
                    *vals.last_mut().unwrap() = v;
                    continue;
                }
            }
            if t >= end {
                break;
            }
            bp.push(t);
            vals.push(v);
        }
        Self::new(bp, vals, end)
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn end(&self) -> T {
        self.end
    }

    pub fn duration(&self) -> T {
        self.end - self.breakpoints[0]
    }

    /// (value, Δt) for every segment.
    pub fn segments(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| {
            let next = self.breakpoints.get(i + 1).copied().unwrap_or(self.end);
            (v, next - self.breakpoints[i])
        })
    }

    /// Σ v_i Δt_i / T.
    pub fn time_weighted_mean(&self) -> T {
        let total: T = self.segments().map(|(v, dt)| v * dt).sum();
        total / self.duration()
    }

    pub fn time_weighted_variance(&self) -> T {
        let m = self.time_weighted_mean();
        let total: T = self.segments().map(|(v, dt)| (v - m) * (v - m) * dt).sum();
        total / self.duration()
    }

    /// σ² / μ of the time-weighted distribution.
    pub fn index_of_dispersion(&self) -> Result<T> {
        let m = self.time_weighted_mean();
        if !(m > T::zero()) {
            return Err(AnalyticsError::Domain(format!("index of dispersion needs a positive mean, got {m}")));
        }
        Ok(self.time_weighted_variance() / m)
    }

    /// Time share of each integer value (values are rounded).
    pub fn occupation_pmf(&self) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        let total = self.duration().to_f64_lossy();
        for (v, dt) in self.segments() {
            let k = v.to_f64_lossy().round() as i64;
            *out.entry(k).or_insert(0.0) += dt.to_f64_lossy() / total;
        }
        out
    }

    /// Time-weighted means over consecutive buckets of length `bucket`.
    pub fn bucket_means(&self, bucket: T) -> Result<Vec<(T, T)>> {
        if !(bucket > T::zero()) {
            return Err(AnalyticsError::Domain("bucket length must be positive".into()));
        }
        let start = self.breakpoints[0];
        let n = (self.duration() / bucket).ceil().to_usize().unwrap_or(0).max(1);
        let mut area = vec![T::zero(); n];
        let mut len = vec![T::zero(); n];
        for (i, (v, _)) in self.segments().enumerate() {
            let mut a = self.breakpoints[i];
            let b = self.breakpoints.get(i + 1).copied().unwrap_or(self.end);
            while a < b {
                let k = (((a - start) / bucket).floor().to_usize().unwrap_or(0)).min(n - 1);
                let edge = (start + bucket * T::lit((k + 1) as f64)).min(b);
                let edge = if edge <= a { b } else { edge };
                area[k] = area[k] + v * (edge - a);
                len[k] = len[k] + (edge - a);
                a = edge;
            }
        }
        Ok((0..n)
            .filter(|&k| len[k] > T::zero())
            .map(|k| (start + bucket * T::lit(k as f64), area[k] / len[k]))
            .collect())
    }
}

/// σ² / μ of plain samples (population variance).
pub fn index_of_dispersion<T: Scalar>(samples: &[T]) -> Result<T> {
    if samples.is_empty() {
        return Err(AnalyticsError::Insufficient("no samples".into()));
    }
    let n = T::lit(samples.len() as f64);
    let m = samples.iter().copied().sum::<T>() / n;
    if !(m > T::zero()) {
        return Err(AnalyticsError::Domain(format!("index of dispersion needs a positive mean, got {m}")));
    }
    let var = samples.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / n;
    Ok(var / m)
}

/// σ² / μ of a discrete distribution given as (value, probability) pairs.
pub fn index_of_dispersion_pmf(pmf: &[(f64, f64)]) -> Result<f64> {
    let total: f64 = pmf.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(AnalyticsError::Insufficient("empty distribution".into()));
    }
    let m = pmf.iter().map(|(x, p)| x * p).sum::<f64>() / total;
    if !(m > 0.0) {
        return Err(AnalyticsError::Domain(format!("index of dispersion needs a positive mean, got {m}")));
    }
    let var = pmf.iter().map(|(x, p)| (x - m) * (x - m) * p).sum::<f64>() / total;
    Ok(var / m)
}
