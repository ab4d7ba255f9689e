//! Run configuration files.
//!
//! ```json
//! {
//!   "hawkes": {
//!     "mu": [12 numbers in canonical event order],
//!     "kernels": [{"source": "LO_ask_T", "target": "CO_ask_T", "norm": 0.6, "b": 2.0, "c": 5.0}],
//!     "is_alpha": 0.95, "is_beta": 0.6, "tick_size": 0.01, "mirror": true
//!   },
//!   "handlers": {"standard": {"eta": [0.3, 0.3, 0.3], "kappa_mean": 20.0, "deep_level_mean": 15.0}},
//!   "init": {"s0": 5, "m0_top": 0.5, "m0_deep": 0.5},
//!   "run": {"m_half_depth": 60, "horizon": 10000.0, "seed": 1}
//! }
//! ```
//!
//! A kernel gives either its amplitude `a` or its untruncated `norm`, plus
//! `b`, `c` and an optional truncation `horizon`. With `mirror` set, kernels
//! and baselines of ask-side targets are copied onto the bid side.

use std::path::Path;

use mqh_core::EventType;
use mqh_dynamics::{HandlerConfig, InitConfig, RunSettings};
use mqh_hawkes::{Kernel, Spec, DEFAULT_TRUNCATION_HORIZON};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{IoError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
    pub b: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesConfig {
    pub mu: [f64; 12],
    #[serde(default)]
    pub kernels: Vec<KernelEntry>,
    pub is_alpha: f64,
    pub is_beta: f64,
    #[serde(default = "default_tick")]
    pub tick_size: f64,
    #[serde(default)]
    pub mirror: bool,
}

fn default_tick() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HandlersConfig {
    Standard { eta: [f64; 3], kappa_mean: f64, deep_level_mean: f64 },
    Full(HandlerConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hawkes: HawkesConfig,
    pub handlers: HandlersConfig,
    pub init: InitConfig,
    pub run: RunSettings,
}

fn parse_event(name: &str, path: &str) -> Result<EventType> {
    name.parse::<EventType>()
        .map_err(|_| IoError::Schema { path: path.into(), message: format!("unknown event type {name:?}") })
}

impl HawkesConfig {
    pub fn to_spec(&self) -> Result<Spec> {
        let mut spec = Spec::poisson(self.mu, self.is_alpha, self.is_beta, self.tick_size);
        for (i, k) in self.kernels.iter().enumerate() {
            let path = format!("hawkes.kernels[{i}]");
            let source = parse_event(&k.source, &format!("{path}.source"))?;
            let target = parse_event(&k.target, &format!("{path}.target"))?;
            let kernel = match (k.a, k.norm) {
                (Some(a), None) => Kernel::new(a, k.b, k.c),
                (None, Some(n)) => Kernel::from_norm(n, k.b, k.c),
                _ => {
                    return Err(IoError::Schema { path, message: "give exactly one of `a` and `norm`".into() });
                }
            };
            spec.set_kernel(source, target, kernel.with_horizon(k.horizon.unwrap_or(DEFAULT_TRUNCATION_HORIZON)));
        }
        if self.mirror {
            spec.mirror_ask_to_bid();
        }
        spec.validate().map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

impl HandlersConfig {
    pub fn to_handlers(&self) -> Result<HandlerConfig> {
        let h = match self {
            HandlersConfig::Standard { eta, kappa_mean, deep_level_mean } => {
                HandlerConfig::standard((eta[0], eta[1], eta[2]), *kappa_mean, *deep_level_mean)
                    .map_err(|e| IoError::Invalid(e.to_string()))?
            }
            HandlersConfig::Full(h) => h.clone(),
        };
        h.validate().map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(h)
    }
}

/// Everything a run needs, validated.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub spec: Spec,
    pub handlers: HandlerConfig,
    pub init: InitConfig,
    pub settings: RunSettings,
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self> {
        serde_path_to_error::deserialize(v).map_err(|e| IoError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let spec = self.hawkes.to_spec()?;
        let handlers = self.handlers.to_handlers()?;
        self.run.validate().map_err(|e| IoError::Invalid(e.to_string()))?;
        self.init.validate(self.run.m_half_depth).map_err(|e| IoError::Invalid(e.to_string()))?;
        Ok(ResolvedRun { spec, handlers, init: self.init.clone(), settings: self.run.clone() })
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.into(), source })?;
    RunConfig::from_str(&text)
}

pub fn write_run_config(config: &RunConfig, path: &Path) -> Result<()> {
    std::fs::write(path, config.to_string_pretty() + "\n").map_err(|source| IoError::File { path: path.into(), source })
}

/// Overlays `fragment` onto `base`: objects merge key by key, everything
/// else is replaced.
pub fn merge_json(base: &mut Value, fragment: &Value) {
    match (base, fragment) {
        (Value::Object(b), Value::Object(f)) => {
            for (k, v) in f {
                match b.get_mut(k) {
                    // a new handler variant replaces the old one instead of merging into it
                    Some(slot) if k != "handlers" => merge_json(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, f) => *b = f.clone(),
    }
}

/// Baseline intensities of the reference configuration, canonical order.
pub const REFERENCE_MU: [f64; 12] = [0.86, 0.32, 0.33, 0.48, 0.02, 0.47, 0.47, 0.33, 0.48, 0.02, 0.86, 0.32];

/// The shipped reference configuration (also in `configs/reference.json`).
pub fn reference_config() -> RunConfig {
    let k = |s: &str, t: &str, n: f64| KernelEntry {
        source: s.into(),
        target: t.into(),
        a: None,
        norm: Some(n),
        b: 2.0,
        c: 5.0,
        horizon: None,
    };
    let mut kernels: Vec<KernelEntry> =
        ["LO_ask_D", "CO_ask_D", "LO_ask_T", "CO_ask_T", "MO_ask", "LO_ask_IS"].iter().map(|e| k(e, e, 0.2)).collect();
    kernels.extend([
        k("LO_ask_D", "CO_ask_D", 0.55),
        k("LO_ask_T", "CO_ask_T", 0.6),
        k("LO_ask_IS", "CO_ask_T", 0.3),
        k("CO_ask_T", "LO_ask_IS", 0.2),
        k("MO_ask", "LO_ask_T", 0.2),
    ]);
    RunConfig {
        hawkes: HawkesConfig { mu: REFERENCE_MU, kernels, is_alpha: 0.95, is_beta: 0.6, tick_size: 0.01, mirror: true },
        handlers: HandlersConfig::Standard { eta: [0.3, 0.3, 0.3], kappa_mean: 20.0, deep_level_mean: 15.0 },
        init: InitConfig::new(5, 0.5, 0.5),
        run: RunSettings::new(60, 10_000.0, 1),
    }
}
