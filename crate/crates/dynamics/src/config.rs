use mqh_core::{DeepVolumeDist, GeomWithSpikes};
use serde::{Deserialize, Serialize};

use crate::error::{DynamicsError, Result};

/// Spike locations for order sizes.
pub const KAPPA_SPIKES: [i64; 3] = [1, 10, 100];
pub const KAPPA_SPIKE_MASS: f64 = 0.05;
/// Spike locations for per-level deep volumes.
pub const DEEP_SPIKES: [i64; 5] = [1, 10, 100, 500, 1000];
pub const DEEP_SPIKE_MASS: f64 = 0.03;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiMode {
    /// Purged volume proportional to the purged share of levels.
    #[default]
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    /// New top volume proportional to its share of the old deep levels.
    #[default]
    Uniform,
}

/// Mark distributions of the handlers.
///
/// `eta_t` lives on {0, 1, ...}: 0 joins the best queue. The other two
/// offsets and all sizes live on {1, 2, ...}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandlerConfig {
    pub eta_is: GeomWithSpikes,
    pub eta_t: GeomWithSpikes,
    pub eta_t1: GeomWithSpikes,
    pub kappa_is: GeomWithSpikes,
    pub kappa_t: GeomWithSpikes,
    pub kappa_mo: GeomWithSpikes,
    pub kappa_d: GeomWithSpikes,
    pub deep_volume: DeepVolumeDist,
    #[serde(default)]
    pub xi_mode: XiMode,
    #[serde(default)]
    pub partition_mode: PartitionMode,
}

impl HandlerConfig {
    /// Plain geometric offsets with parameters (η̂_IS, η̂_T, η̂_{T+1}), spiked
    /// geometric sizes with mean `kappa_mean`, and per-level deep volumes with
    /// mean `deep_level_mean`.
    pub fn standard(eta: (f64, f64, f64), kappa_mean: f64, deep_level_mean: f64) -> Result<Self> {
        let kappa = GeomWithSpikes::with_spikes(1.0 / kappa_mean.max(1.0), &KAPPA_SPIKES, KAPPA_SPIKE_MASS)?;
        let deep = GeomWithSpikes::with_spikes(1.0 / deep_level_mean.max(1.0), &DEEP_SPIKES, DEEP_SPIKE_MASS)?;
        let cfg = HandlerConfig {
            eta_is: GeomWithSpikes::geometric(eta.0)?,
            eta_t: GeomWithSpikes::new(eta.1, 0, Vec::new())?,
            eta_t1: GeomWithSpikes::geometric(eta.2)?,
            kappa_is: kappa.clone(),
            kappa_t: kappa.clone(),
            kappa_mo: kappa.clone(),
            kappa_d: kappa,
            deep_volume: DeepVolumeDist::new(deep)?,
            xi_mode: XiMode::Uniform,
            partition_mode: PartitionMode::Uniform,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("eta_is", &self.eta_is, 1),
            ("eta_t", &self.eta_t, 0),
            ("eta_t1", &self.eta_t1, 1),
            ("kappa_is", &self.kappa_is, 1),
            ("kappa_t", &self.kappa_t, 1),
            ("kappa_mo", &self.kappa_mo, 1),
            ("kappa_d", &self.kappa_d, 1),
            ("deep_volume.per_level", &self.deep_volume.per_level, 1),
        ];
        for (name, d, min) in named {
            d.validate().map_err(|e| DynamicsError::Config(format!("{name}: {e}")))?;
            if d.support_min != min {
                return Err(DynamicsError::Config(format!("{name}: support_min must be {min}, got {}", d.support_min)));
            }
        }
        Ok(())
    }
}

/// Initial book: spread s0 and geometric initial widths with parameters
/// (M0_T, M0_D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub s0: i64,
    pub m0_top: f64,
    pub m0_deep: f64,
    #[serde(default = "default_anchor")]
    pub anchor_ticks: i64,
}

fn default_anchor() -> i64 {
    mqh_core::lob::DEFAULT_ANCHOR_TICKS
}

impl InitConfig {
    pub fn new(s0: i64, m0_top: f64, m0_deep: f64) -> Self {
        InitConfig { s0, m0_top, m0_deep, anchor_ticks: default_anchor() }
    }

    pub fn validate(&self, m_half_depth: i64) -> Result<()> {
        if self.s0 < 1 || self.s0 > 2 * m_half_depth - 2 {
            return Err(DynamicsError::Config(format!(
                "s0 = {} must lie in [1, 2 M - 2] = [1, {}]",
                self.s0,
                2 * m_half_depth - 2
            )));
        }
        for (name, p) in [("m0_top", self.m0_top), ("m0_deep", self.m0_deep)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(DynamicsError::Config(format!("{name} = {p} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub m_half_depth: i64,
    pub horizon: f64,
    pub seed: u64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

impl RunSettings {
    pub fn new(m_half_depth: i64, horizon: f64, seed: u64) -> Self {
        RunSettings { m_half_depth, horizon, seed, snapshot_every: DEFAULT_SNAPSHOT_EVERY }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_half_depth < 2 {
            return Err(DynamicsError::Config(format!("m_half_depth must be >= 2, got {}", self.m_half_depth)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(DynamicsError::Config(format!("horizon must be positive and finite, got {}", self.horizon)));
        }
        if self.snapshot_every == 0 {
            return Err(DynamicsError::Config("snapshot_every must be >= 1".into()));
        }
        Ok(())
    }
}
