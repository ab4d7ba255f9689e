use mqh_core::{EventType, Scalar, NUM_EVENT_TYPES};
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::kernel::PowerLawKernel;

const N: usize = NUM_EVENT_TYPES;

/// Exogenous rates, the 12×12 kernel matrix and the in-spread multiplier.
///
/// `kernels[target * 12 + source]` holds φ^{source→target}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HawkesSpec<T> {
    pub mu: [T; N],
    pub kernels: Vec<PowerLawKernel<T>>,
    pub is_alpha: T,
    pub is_beta: T,
    pub tick_size: T,
}

impl<T: Scalar> HawkesSpec<T> {
    /// Poisson specification with all kernels zero.
    pub fn poisson(mu: [T; N], is_alpha: T, is_beta: T, tick_size: T) -> Self {
        HawkesSpec { mu, kernels: vec![PowerLawKernel::zero(); N * N], is_alpha, is_beta, tick_size }
    }

    pub fn kernel(&self, source: EventType, target: EventType) -> &PowerLawKernel<T> {
        &self.kernels[target.index() * N + source.index()]
    }

    pub fn set_kernel(&mut self, source: EventType, target: EventType, k: PowerLawKernel<T>) {
        self.kernels[target.index() * N + source.index()] = k;
    }

    /// (δ (s − 1) / α)^β, applied to both in-spread intensities.
    pub fn in_spread_multiplier(&self, spread_ticks: i64) -> T {
        if spread_ticks <= 1 {
            return T::zero();
        }
        let x = self.tick_size * T::lit((spread_ticks - 1) as f64) / self.is_alpha;
        x.powf(self.is_beta)
    }

    pub fn multipliers(&self, spread_ticks: i64) -> [T; N] {
        let m = self.in_spread_multiplier(spread_ticks);
        let mut out = [T::one(); N];
        for e in EventType::ALL {
            if e.is_in_spread() {
                out[e.index()] = m;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.len() != N * N {
            return Err(HawkesError::InvalidSpec(format!("expected {} kernels, got {}", N * N, self.kernels.len())));
        }
        for (i, m) in self.mu.iter().enumerate() {
            if !(m.is_finite() && *m >= T::zero()) {
                return Err(HawkesError::InvalidSpec(format!("mu[{}] = {m} must be finite and >= 0", EventType::ALL[i])));
            }
        }
        let positive = |x: T| x.is_finite() && x > T::zero();
        if !positive(self.is_alpha) || !positive(self.is_beta) || !positive(self.tick_size) {
            return Err(HawkesError::InvalidSpec(format!(
                "in-spread alpha ({}), beta ({}) and tick size ({}) must be positive",
                self.is_alpha, self.is_beta, self.tick_size
            )));
        }
        for k in &self.kernels {
            k.validate()?;
        }
        Ok(())
    }

    /// Copies every ask-target parameter onto the mirrored bid target.
    pub fn mirror_ask_to_bid(&mut self) {
        for target in EventType::ALL.into_iter().filter(|e| e.side() == mqh_core::Side::Ask) {
            self.mu[target.mirror().index()] = self.mu[target.index()];
            for source in EventType::ALL {
                let k = *self.kernel(source, target);
                self.set_kernel(source.mirror(), target.mirror(), k);
            }
        }
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        EventType::ALL.into_iter().all(|t| {
            self.mu[t.index()] == self.mu[t.mirror().index()]
                && EventType::ALL.into_iter().all(|s| self.kernel(s, t) == self.kernel(s.mirror(), t.mirror()))
        })
    }

    /// Spec with every event label reflected bid↔ask.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for t in EventType::ALL {
            out.mu[t.mirror().index()] = self.mu[t.index()];
            for s in EventType::ALL {
                out.set_kernel(s.mirror(), t.mirror(), *self.kernel(s, t));
            }
        }
        out
    }

    pub fn max_horizon(&self) -> T {
        self.kernels
            .iter()
            .filter(|k| !k.is_zero())
            .map(|k| k.horizon)
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn cast<U: Scalar>(&self) -> HawkesSpec<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        HawkesSpec {
            mu: self.mu.map(c),
            kernels: self
                .kernels
                .iter()
                .map(|k| PowerLawKernel { a: c(k.a), b: c(k.b), c: c(k.c), horizon: c(k.horizon) })
                .collect(),
            is_alpha: c(self.is_alpha),
            is_beta: c(self.is_beta),
            tick_size: c(self.tick_size),
        }
    }
}
