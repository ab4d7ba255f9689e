//! Geometric laws with spikes at round numbers, bounded rejection sampling and
//! geometric maximum likelihood.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const REJECTION_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub value: i64,
    pub mass: f64,
}

/// Mixture of a shifted geometric law and point masses.
///
/// With probability Σ mass a spike is picked proportionally to its mass,
/// otherwise k = support_min + G with G ~ Geom(p) on {0, 1, ...}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeomWithSpikes {
    pub p: f64,
    #[serde(default = "one")]
    pub support_min: i64,
    #[serde(default)]
    pub spikes: Vec<Spike>,
}

fn one() -> i64 {
    1
}

impl GeomWithSpikes {
    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(p, 1, Vec::new())
    }

    pub fn new(p: f64, support_min: i64, spikes: Vec<Spike>) -> Result<Self> {
        let d = GeomWithSpikes { p, support_min, spikes };
        d.validate()?;
        Ok(d)
    }

    /// Geometric base with equal extra mass at each listed value.
    pub fn with_spikes(p: f64, values: &[i64], mass_each: f64) -> Result<Self> {
        let spikes = values.iter().map(|&value| Spike { value, mass: mass_each }).collect();
        Self::new(p, 1, spikes)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(CoreError::InvalidDistribution(format!("p must lie in (0, 1], got {}", self.p)));
        }
        let mut total = 0.0;
        for s in &self.spikes {
            if !(s.mass >= 0.0) || s.value < self.support_min {
                return Err(CoreError::InvalidDistribution(format!(
                    "spike at {} with mass {} is outside the support",
                    s.value, s.mass
                )));
            }
            total += s.mass;
        }
        if total >= 1.0 {
            return Err(CoreError::InvalidDistribution(format!("total spike mass {total} must be < 1")));
        }
        Ok(())
    }

    pub fn spike_mass(&self) -> f64 {
        self.spikes.iter().map(|s| s.mass).sum()
    }

    fn geom_pmf(&self, k: i64) -> f64 {
        if k < self.support_min {
            return 0.0;
        }
        let j = (k - self.support_min) as f64;
        if self.p == 1.0 {
            return if j == 0.0 { 1.0 } else { 0.0 };
        }
        self.p * (1.0 - self.p).powf(j)
    }

    /// P(G ≤ k) for the base geometric.
    fn geom_cdf(&self, k: i64) -> f64 {
        if k < self.support_min {
            return 0.0;
        }
        let j = (k - self.support_min + 1) as f64;
        1.0 - (1.0 - self.p).powf(j)
    }

    pub fn pmf(&self, k: i64) -> f64 {
        let spikes: f64 = self.spikes.iter().filter(|s| s.value == k).map(|s| s.mass).sum();
        (1.0 - self.spike_mass()) * self.geom_pmf(k) + spikes
    }

    /// Probability of the closed interval [lo, hi].
    pub fn mass_between(&self, lo: i64, hi: i64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let base = self.geom_cdf(hi) - self.geom_cdf(lo.saturating_sub(1));
        let spikes: f64 = self.spikes.iter().filter(|s| s.value >= lo && s.value <= hi).map(|s| s.mass).sum();
        (1.0 - self.spike_mass()) * base + spikes
    }

    pub fn mean(&self) -> f64 {
        let base = self.support_min as f64 + (1.0 - self.p) / self.p;
        let spikes: f64 = self.spikes.iter().map(|s| s.mass * s.value as f64).sum();
        (1.0 - self.spike_mass()) * base + spikes
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if !self.spikes.is_empty() {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for s in &self.spikes {
                acc += s.mass;
                if u < acc {
                    return s.value;
                }
            }
        }
        self.support_min + sample_geometric_failures(self.p, rng)
    }
}

/// Number of failures before the first success, by inversion.
fn sample_geometric_failures<R: Rng + ?Sized>(p: f64, rng: &mut R) -> i64 {
    if p >= 1.0 {
        return 0;
    }
    // u in (0, 1]
    let u: f64 = 1.0 - rng.random::<f64>();
    let g = (u.ln() / (1.0 - p).ln()).floor();
    if g >= i64::MAX as f64 {
        i64::MAX / 4
    } else {
        g as i64
    }
}

/// Draws from `dist` conditioned on [lo, hi] by rejection.
pub fn sample_bounded<R: Rng + ?Sized>(dist: &GeomWithSpikes, lo: i64, hi: i64, rng: &mut R) -> Result<i64> {
    if lo > hi {
        return Err(CoreError::Sampling(format!("empty bounds [{lo}, {hi}]")));
    }
    if dist.mass_between(lo, hi) <= 0.0 {
        return Err(CoreError::Sampling(format!("distribution has no mass in [{lo}, {hi}]")));
    }
    for _ in 0..REJECTION_BUDGET {
        let k = dist.sample(rng);
        if k >= lo && k <= hi {
            return Ok(k);
        }
    }
    Err(CoreError::Sampling(format!(
        "rejection budget of {REJECTION_BUDGET} draws exhausted for bounds [{lo}, {hi}]"
    )))
}

/// Law of the unseen volume of a deep meta-queue: sum of per-level draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeepVolumeDist {
    pub per_level: GeomWithSpikes,
}

impl DeepVolumeDist {
    pub fn new(per_level: GeomWithSpikes) -> Result<Self> {
        per_level.validate()?;
        if per_level.support_min < 1 {
            return Err(CoreError::InvalidDistribution("per-level volume must have support_min >= 1".into()));
        }
        Ok(DeepVolumeDist { per_level })
    }

    pub fn mean(&self, m_deep: i64) -> f64 {
        m_deep as f64 * self.per_level.mean()
    }
}

pub fn sample_deep_volume<R: Rng + ?Sized>(dist: &DeepVolumeDist, m_deep: i64, rng: &mut R) -> Result<i64> {
    if m_deep < 1 {
        return Err(CoreError::Domain(format!("deep width must be >= 1, got {m_deep}")));
    }
    Ok((0..m_deep).map(|_| dist.per_level.sample(rng)).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeomFit {
    pub p: f64,
    pub std_err: f64,
    pub n: usize,
}

/// MLE of p for a geometric law on {1, 2, ...}.
pub fn fit_geometric_mle(samples: &[i64]) -> Result<GeomFit> {
    if samples.is_empty() {
        return Err(CoreError::Domain("cannot fit a geometric law to no samples".into()));
    }
    if let Some(&bad) = samples.iter().find(|&&k| k < 1) {
        return Err(CoreError::Domain(format!("geometric samples must be >= 1, got {bad}")));
    }
    let n = samples.len() as f64;
    let total: f64 = samples.iter().map(|&k| k as f64).sum();
    let p = n / total;
    let failures = total - n;
    let info = n / (p * p) + if p < 1.0 { failures / ((1.0 - p) * (1.0 - p)) } else { 0.0 };
    Ok(GeomFit { p, std_err: 1.0 / info.sqrt(), n: samples.len() })
}

/// One observation of a geometric law on {lo, lo+1, ...} truncated to [lo, hi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedObs {
    pub value: i64,
    pub lo: i64,
    pub hi: i64,
}

/// MLE of p when each observation was drawn from a geometric law restricted
/// to its own known interval, as produced by bounded rejection sampling.
pub fn fit_truncated_geometric_mle(obs: &[TruncatedObs]) -> Result<GeomFit> {
    if obs.is_empty() {
        return Err(CoreError::Domain("cannot fit a geometric law to no samples".into()));
    }
    for o in obs {
        if o.value < o.lo || o.value > o.hi {
            return Err(CoreError::Domain(format!("observation {} outside [{}, {}]", o.value, o.lo, o.hi)));
        }
    }
    if obs.iter().all(|o| o.value == o.lo) {
        return Ok(GeomFit { p: 1.0, std_err: 0.0, n: obs.len() });
    }
    // score in terms of r = 1 - p; the log-likelihood is concave in p on (0, 1)
    let loglik = |p: f64| -> f64 {
        let r = 1.0 - p;
        obs.iter()
            .map(|o| {
                let j = (o.value - o.lo) as f64;
                let w = (o.hi - o.lo + 1) as f64;
                let norm = if o.hi == i64::MAX { 1.0 } else { 1.0 - r.powf(w) };
                p.ln() + j * r.ln() - norm.ln()
            })
            .sum()
    };
    let (mut a, mut b) = (1e-9_f64, 1.0 - 1e-12);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (loglik(x1), loglik(x2));
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = loglik(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = loglik(x1);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let p = 0.5 * (a + b);
    let h = 1e-5 * p.min(1.0 - p).max(1e-9);
    let curv = (loglik(p + h) - 2.0 * loglik(p) + loglik(p - h)) / (h * h);
    let std_err = if curv < 0.0 { (-1.0 / curv).sqrt() } else { f64::NAN };
    Ok(GeomFit { p, std_err, n: obs.len() })
}
