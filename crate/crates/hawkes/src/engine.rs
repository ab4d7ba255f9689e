use mqh_core::{EventType, Scalar, NUM_EVENT_TYPES};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::history::EventHistory;
use crate::spec::HawkesSpec;

const N: usize = NUM_EVENT_TYPES;

fn clip<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// λ^(i) = max(0, m_i (μ_i + excitation_i)) with m_i the in-spread multiplier
/// for the two in-spread types and 1 otherwise.
pub fn intensities_from_excitation<T: Scalar>(
    spec: &HawkesSpec<T>,
    excitation: &[T; N],
    spread_ticks: i64,
) -> [T; N] {
    let mult = spec.multipliers(spread_ticks);
    let mut out = [T::zero(); N];
    for i in 0..N {
        out[i] = clip(mult[i] * (spec.mu[i] + excitation[i]));
    }
    out
}

pub fn intensity<T: Scalar>(
    spec: &HawkesSpec<T>,
    history: &mut EventHistory<T>,
    spread_ticks: i64,
    t: T,
) -> Result<[T; N]> {
    if spread_ticks < 1 {
        return Err(HawkesError::InvalidSpread(spread_ticks));
    }
    let exc = history.excitation(t)?;
    Ok(intensities_from_excitation(spec, &exc, spread_ticks))
}

/// Ogata thinning driver. The caller supplies the spread before each draw,
/// since it can only change when an event is applied.
#[derive(Clone, Debug)]
pub struct HawkesSimulator<T> {
    spec: HawkesSpec<T>,
    history: EventHistory<T>,
    now: T,
    sums: Vec<T>,
    /// Whether `sums` hold the group sums at `now`.
    sums_current: bool,
    candidates: u64,
}

impl<T: Scalar> HawkesSimulator<T> {
    pub fn new(spec: HawkesSpec<T>) -> Result<Self> {
        spec.validate()?;
        let history = EventHistory::new(&spec);
        Ok(HawkesSimulator { spec, history, now: T::zero(), sums: Vec::new(), sums_current: false, candidates: 0 })
    }

    pub fn spec(&self) -> &HawkesSpec<T> {
        &self.spec
    }

    pub fn history(&self) -> &EventHistory<T> {
        &self.history
    }

    pub fn now(&self) -> T {
        self.now
    }

    /// Candidate points proposed so far (accepted plus rejected).
    pub fn candidates(&self) -> u64 {
        self.candidates
    }

    /// Dominating and actual total intensity from the current sums.
    fn rates(&self, mult: T) -> (T, [T; N]) {
        let (full, positive) = self.history.excitation_from_sums(&self.sums);
        let mut bound = T::zero();
        let mut lambda = [T::zero(); N];
        for e in EventType::ALL {
            let i = e.index();
            let m = if e.is_in_spread() { mult } else { T::one() };
            bound = bound + clip(m * (self.spec.mu[i] + positive[i]));
            lambda[i] = clip(m * (self.spec.mu[i] + full[i]));
        }
        (bound, lambda)
    }

    /// Next event before `horizon`, or `None` when the horizon is reached.
    pub fn next_event<R: Rng + ?Sized>(
        &mut self,
        spread_ticks: i64,
        horizon: T,
        rng: &mut R,
    ) -> Result<Option<(T, EventType)>> {
        if spread_ticks < 1 {
            return Err(HawkesError::InvalidSpread(spread_ticks));
        }
        let mult = self.spec.in_spread_multiplier(spread_ticks);
        if !self.sums_current {
            self.history.group_sums(self.now, &mut self.sums)?;
            self.sums_current = true;
        }
        let (mut bound, _) = self.rates(mult);
        loop {
            if !bound.is_finite() {
                return Err(HawkesError::RateOverflow(bound.to_f64_lossy()));
            }
            if bound <= T::zero() {
                self.now = horizon;
                self.sums_current = false;
                return Ok(None);
            }
            let e = -(T::one() - T::lit(rng.random::<f64>())).ln();
            let candidate = self.now + e / bound;
            if candidate > horizon {
                self.now = horizon;
                self.sums_current = false;
                return Ok(None);
            }
            if candidate <= self.now {
                continue;
            }
            self.now = candidate;
            self.candidates += 1;
            self.history.group_sums(candidate, &mut self.sums)?;
            let (new_bound, lambda) = self.rates(mult);
            let total: T = lambda.iter().copied().sum();
            let u = T::lit(rng.random::<f64>()) * bound;
            if u < total {
                let mut acc = T::zero();
                let mut pick = EventType::ALL[N - 1];
                for e in EventType::ALL {
                    acc = acc + lambda[e.index()];
                    if u < acc {
                        pick = e;
                        break;
                    }
                }
                if lambda[pick.index()] <= T::zero() {
                    // rounding put u past the last positive rate
                    pick = *EventType::ALL.iter().rev().find(|e| lambda[e.index()] > T::zero()).unwrap_or(&pick);
                }
                self.history.push(pick, candidate)?;
                self.history.add_self_contribution(pick, &mut self.sums);
                return Ok(Some((candidate, pick)));
            }
            bound = new_bound;
        }
    }
}

/// Simulates the process alone. `on_event` applies each event and returns the
/// spread in force afterwards.
pub fn simulate<T: Scalar, F: FnMut(T, EventType) -> i64>(
    spec: &HawkesSpec<T>,
    initial_spread: i64,
    mut on_event: F,
    horizon: T,
    seed: u64,
) -> Result<Vec<(T, EventType)>> {
    if !(horizon > T::zero()) {
        return Err(HawkesError::InvalidSpec(format!("horizon must be positive, got {horizon}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sim = HawkesSimulator::new(spec.clone())?;
    let report = kernel_norm_matrix(spec, Some(initial_spread));
    if let Ok(r) = &report {
        if !r.stable {
            log::warn!("kernel norm matrix has spectral radius {:.3} >= 1", r.spectral_radius);
        }
    }
    let mut spread = initial_spread;
    let mut out = Vec::new();
    while let Some((t, e)) = sim.next_event(spread, horizon, &mut rng)? {
        out.push((t, e));
        spread = on_event(t, e);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// norms[target][source] = |∫φ^{source→target}|.
    pub norms: Vec<Vec<f64>>,
    pub signed: Vec<Vec<f64>>,
    /// Fraction of each kernel's mass removed by truncation.
    pub truncated_mass: Vec<Vec<f64>>,
    pub spectral_radius: f64,
    pub stable: bool,
}

/// Kernel norms, truncation losses and the spectral radius of the signed
/// norm matrix. When `spread` is given, in-spread rows are scaled by the
/// in-spread multiplier at that spread.
pub fn kernel_norm_matrix<T: Scalar>(spec: &HawkesSpec<T>, spread: Option<i64>) -> Result<NormReport> {
    let mut norms = vec![vec![0.0; N]; N];
    let mut signed = vec![vec![0.0; N]; N];
    let mut truncated = vec![vec![0.0; N]; N];
    for target in EventType::ALL {
        let scale = match spread {
            Some(s) if target.is_in_spread() => spec.in_spread_multiplier(s).to_f64_lossy(),
            _ => 1.0,
        };
        for source in EventType::ALL {
            let k = spec.kernel(source, target);
            let n = k.norm().ok_or_else(|| HawkesError::InfiniteNorm {
                source_type: source.label().into(),
                target_type: target.label().into(),
                b: k.b.to_f64_lossy(),
            })?;
            let (ti, si) = (target.index(), source.index());
            norms[ti][si] = n.to_f64_lossy();
            signed[ti][si] = n.to_f64_lossy() * k.a.signum().to_f64_lossy() * scale;
            truncated[ti][si] = if k.is_zero() { 0.0 } else { k.truncated_mass_fraction().to_f64_lossy() };
        }
    }
    let radius = spectral_radius(&signed);
    Ok(NormReport { norms, signed, truncated_mass: truncated, spectral_radius: radius, stable: radius < 1.0 })
}

pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    mat.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}
