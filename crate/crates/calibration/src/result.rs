//! The combined calibration output and its run-config fragment.

use mqh_analytics::EventLog;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::is_fit::{calibrate_is_power_law, IsFit, IsFitOptions};
use crate::kernels::{estimate_kernels_binned, KernelEstimate};
use crate::marks::{calibrate_deep_volume, calibrate_eta, calibrate_kappa, DeepVolumeFit, EtaFits, KappaFits};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// In currency units.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub is_fit: Option<IsFit>,
    /// Why the power law could not be fitted, if it could not.
    pub is_fit_error: Option<String>,
    pub eta: EtaFits,
    pub kappa: KappaFits,
    pub deep: Option<DeepVolumeFit>,
    pub kernels: Option<KernelEstimate>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CalibrationOptions {
    pub is_fit: IsFitOptions,
    pub min_obs: usize,
    /// (bin width, lag windows, ridge) of the kernel fit; `None` skips it.
    pub kernels: Option<(f64, usize, f64)>,
}

pub fn calibrate(log: &EventLog, opts: &CalibrationOptions) -> Result<CalibrationResult> {
    let mut notes = vec!["alpha is expressed in currency units, like the tick size".to_string()];
    let (is_fit, is_fit_error) = match calibrate_is_power_law(log, &opts.is_fit) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let eta = calibrate_eta(log, opts.min_obs)?;
    let kappa = calibrate_kappa(log, opts.min_obs)?;
    let deep = calibrate_deep_volume(log).ok();
    let kernels = match opts.kernels {
        Some((w, lags, ridge)) => match estimate_kernels_binned(log, w, lags, ridge) {
            Ok(k) => Some(k),
            Err(e) => {
                notes.push(format!("kernel fit skipped: {e}"));
                None
            }
        },
        None => None,
    };
    if let Some(k) = &kernels {
        notes.push(format!(
            "kernel norms come from a least-squares VAR on {} s bins; same-bin excitation is not captured",
            k.bin_width
        ));
    }
    Ok(CalibrationResult {
        alpha: is_fit.as_ref().map(|f| f.alpha),
        beta: is_fit.as_ref().map(|f| f.beta),
        is_fit,
        is_fit_error,
        eta,
        kappa,
        deep,
        kernels,
        notes,
    })
}

impl CalibrationResult {
    /// Partial run config with the calibrated values; fields that could not be
    /// estimated are left out so that a base config supplies them.
    pub fn run_config_fragment(&self) -> Value {
        let mut hawkes = serde_json::Map::new();
        if let (Some(a), Some(b)) = (self.alpha, self.beta) {
            hawkes.insert("is_alpha".into(), json!(a));
            hawkes.insert("is_beta".into(), json!(b));
        }
        let mut out = serde_json::Map::new();
        if !hawkes.is_empty() {
            out.insert("hawkes".into(), Value::Object(hawkes));
        }
        let eta = [self.eta.eta_is.p(), self.eta.eta_t.p(), self.eta.eta_t1.p()];
        if let (Some(e0), Some(e1), Some(e2), Some(k), Some(d)) =
            (eta[0], eta[1], eta[2], self.kappa.pooled_limit.p(), self.deep)
        {
            out.insert(
                "handlers".into(),
                json!({ "standard": { "eta": [e0, e1, e2], "kappa_mean": 1.0 / k, "deep_level_mean": d.mean_per_level } }),
            );
        }
        Value::Object(out)
    }
}
