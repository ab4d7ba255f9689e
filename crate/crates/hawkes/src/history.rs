//! Event history with a cached evaluation of power-law sums.
//!
//! For a fixed source and kernel shape (b, c, H) the engine needs
//! S(t) = Σ_k (1 + c (t − t_k))^(−b) over events with t − t_k ≤ H.
//! Old events are grouped into clusters whose scaled moments
//! M_n = Σ v_k^n, v_k = (t_k − centre) / w, allow the binomial series
//!
//!   Σ_k (1 + c x − c w v_k)^(−b) = (1 + c x)^(−b) Σ_n C(−b, n) (−ρ)^n M_n,
//!   ρ = c w / (1 + c x), x = t − centre,
//!
//! which converges fast once ρ is small. ρ only decreases as t grows, so a
//! cluster admitted at ρ ≤ ρ_max stays admissible. Events crossing the
//! truncation horizon are subtracted from their cluster's moments.

use std::collections::VecDeque;

use mqh_core::{EventType, Scalar, NUM_EVENT_TYPES};

use crate::error::{HawkesError, Result};
use crate::spec::HawkesSpec;

const MAX_TERMS: usize = 48;
const RHO_CANDIDATES: [f64; 8] = [0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.02];
const TERM_TABLE: usize = 16;

#[derive(Clone, Debug)]
struct Cluster<T> {
    /// Global index of the oldest event still inside the cluster.
    first: usize,
    last: usize,
    centre: T,
    half: T,
    moments: [T; MAX_TERMS],
}

/// Running value of Σ_k (1 + c (t − t_k))^(−b) over events within the horizon.
#[derive(Clone, Debug)]
pub struct PowerSum<T> {
    b: T,
    c: T,
    horizon: T,
    coef: [T; MAX_TERMS],
    /// Number of series terms needed for ρ in each of TERM_TABLE bins of [0, ρ_max].
    terms_for_rho: [usize; TERM_TABLE + 1],
    rho_max: T,
    /// Moments kept per cluster; enough for ρ = ρ_max.
    order: usize,
    times: VecDeque<T>,
    base: usize,
    clusters: VecDeque<Cluster<T>>,
    pascal: Vec<[T; MAX_TERMS]>,
}

/// |C(−b, n)| for n = 0..len.
fn abs_binomial_coeffs(b: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0;
    for n in 0..len {
        out.push(c);
        c *= (b + n as f64) / (n as f64 + 1.0);
    }
    out
}

/// Smallest term count whose tail is below `tol` relative to the weakest event.
fn terms_needed(b: f64, rho: f64, tol: f64) -> Option<usize> {
    let coeffs = abs_binomial_coeffs(b, 400);
    let scale = (1.0 + rho).powf(b);
    let terms: Vec<f64> = coeffs.iter().enumerate().map(|(n, c)| c * rho.powi(n as i32) * scale).collect();
    let mut tail: f64 = terms.iter().sum::<f64>();
    for (n, t) in terms.iter().enumerate() {
        if tail <= tol && n >= 1 {
            return Some(n);
        }
        tail -= t;
    }
    None
}

impl<T: Scalar> PowerSum<T> {
    pub fn new(b: T, c: T, horizon: T) -> Self {
        let bf = b.to_f64_lossy();
        let tol = T::epsilon().to_f64_lossy() * 1e3;
        let rho_max = RHO_CANDIDATES
            .iter()
            .copied()
            .find(|&r| terms_needed(bf, r, tol).is_some_and(|n| n <= MAX_TERMS))
            .unwrap_or(0.0);
        let mut terms_for_rho = [1usize; TERM_TABLE + 1];
        if rho_max > 0.0 {
            for (i, slot) in terms_for_rho.iter_mut().enumerate() {
                let r = rho_max * i as f64 / TERM_TABLE as f64;
                *slot = if r == 0.0 { 1 } else { terms_needed(bf, r, tol).unwrap_or(MAX_TERMS).min(MAX_TERMS) };
            }
        }
        let mut coef = [T::zero(); MAX_TERMS];
        let mut cn = 1.0;
        for (n, slot) in coef.iter_mut().enumerate() {
            *slot = T::lit(cn);
            cn *= -(bf + n as f64) / (n as f64 + 1.0);
        }
        let mut pascal = vec![[T::zero(); MAX_TERMS]; MAX_TERMS];
        for n in 0..MAX_TERMS {
            pascal[n][0] = T::one();
            for i in 1..=n {
                pascal[n][i] = pascal[n - 1][i - 1] + if i < n { pascal[n - 1][i] } else { T::zero() };
            }
        }
        PowerSum {
            b,
            c,
            horizon,
            coef,
            terms_for_rho,
            rho_max: T::lit(rho_max),
            order: terms_for_rho[TERM_TABLE],
            times: VecDeque::new(),
            base: 0,
            clusters: VecDeque::new(),
            pascal,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    fn time(&self, global: usize) -> T {
        self.times[global - self.base]
    }

    /// Drops events older than the horizon at time `t`.
    fn expire(&mut self, t: T) {
        while let Some(&t0) = self.times.front() {
            if t - t0 <= self.horizon {
                break;
            }
            let cl = self.clusters.front_mut().expect("every event belongs to a cluster");
            debug_assert_eq!(cl.first, self.base);
            if cl.first == cl.last {
                self.clusters.pop_front();
            } else {
                let v = if cl.half > T::zero() { (t0 - cl.centre) / cl.half } else { T::zero() };
                let mut p = T::one();
                for m in cl.moments[..self.order].iter_mut() {
                    *m = *m - p;
                    p = p * v;
                }
                cl.first += 1;
            }
            self.times.pop_front();
            self.base += 1;
        }
    }

    fn rho_at(&self, centre: T, half: T, t: T) -> T {
        self.c * half / (T::one() + self.c * (t - centre))
    }

    /// Adds an event at `t`; `t` must not precede earlier events.
    pub fn push(&mut self, t: T) {
        self.expire(t);
        let idx = self.base + self.times.len();
        self.times.push_back(t);
        let mut moments = [T::zero(); MAX_TERMS];
        moments[0] = T::one();
        self.clusters.push_back(Cluster { first: idx, last: idx, centre: t, half: T::zero(), moments });
        self.consolidate(t);
    }

    fn consolidate(&mut self, t: T) {
        if self.rho_max <= T::zero() {
            return;
        }
        let two = T::lit(2.0);
        let mut i = 0;
        while i + 1 < self.clusters.len() {
            let (a, b) = (&self.clusters[i], &self.clusters[i + 1]);
            let lo = a.centre - a.half;
            let hi = b.centre + b.half;
            let half = (hi - lo) / two;
            let centre = lo + half;
            if self.rho_at(centre, half, t) <= self.rho_max {
                let merged = self.merge(i, centre, half);
                self.clusters[i] = merged;
                self.clusters.remove(i + 1);
            } else {
                i += 1;
            }
        }
    }

    fn merge(&self, i: usize, centre: T, half: T) -> Cluster<T> {
        let (a, b) = (&self.clusters[i], &self.clusters[i + 1]);
        let mut moments = [T::zero(); MAX_TERMS];
        for cl in [a, b] {
            if half <= T::zero() {
                moments[0] = moments[0] + cl.moments[0];
                continue;
            }
            // v' = s v + d, with |d| + s ≤ 1 since the old interval lies inside the new one
            let s = cl.half / half;
            let d = (cl.centre - centre) / half;
            let order = self.order;
            let mut sp = [T::one(); MAX_TERMS];
            let mut dp = [T::one(); MAX_TERMS];
            for k in 1..order {
                sp[k] = sp[k - 1] * s;
                dp[k] = dp[k - 1] * d;
            }
            let top = if cl.half > T::zero() { order } else { 1 };
            for (n, out) in moments[..order].iter_mut().enumerate() {
                let mut acc = T::zero();
                for i in 0..=n.min(top - 1) {
                    acc = acc + self.pascal[n][i] * sp[i] * dp[n - i] * cl.moments[i];
                }
                *out = *out + acc;
            }
        }
        Cluster { first: a.first, last: b.last, centre, half, moments }
    }

    /// S(t). Events that fell out of the horizon are discarded for good, so
    /// queries must be made at non-decreasing times.
    pub fn eval(&mut self, t: T) -> T {
        self.expire(t);
        let one = T::one();
        let nb = -self.b;
        let bins = T::lit(TERM_TABLE as f64);
        let mut sum = T::zero();
        for cl in &self.clusters {
            let den = one + self.c * (t - cl.centre);
            let lead = den.powf(nb);
            if cl.half <= T::zero() {
                sum = sum + cl.moments[0] * lead;
                continue;
            }
            let rho = self.c * cl.half / den;
            let bin = (rho / self.rho_max * bins).ceil().to_usize().unwrap_or(TERM_TABLE).min(TERM_TABLE);
            let terms = self.terms_for_rho[bin];
            let mut acc = T::zero();
            let z = -rho;
            for n in (0..terms).rev() {
                acc = acc * z + self.coef[n] * cl.moments[n];
            }
            sum = sum + lead * acc;
        }
        sum
    }

    /// Direct O(n) evaluation over the retained raw times.
    pub fn eval_direct(&self, t: T) -> T {
        self.times
            .iter()
            .filter(|&&tk| t - tk <= self.horizon && tk <= t)
            .map(|&tk| (T::one() + self.c * (t - tk)).powf(-self.b))
            .sum()
    }

    pub fn shape(&self) -> (T, T, T) {
        (self.b, self.c, self.horizon)
    }

    pub fn last_time(&self) -> Option<T> {
        self.times.back().copied()
    }

    #[doc(hidden)]
    pub fn first_global_index(&self) -> usize {
        self.clusters.front().map(|c| c.first).unwrap_or(self.base)
    }

    #[doc(hidden)]
    pub fn check_partition(&self) -> bool {
        let mut next = self.base;
        for cl in &self.clusters {
            if cl.first != next || cl.last < cl.first {
                return false;
            }
            if cl.half > T::zero() {
                let slack = cl.half * T::lit(1e-9);
                let lo = cl.centre - cl.half - slack;
                let hi = cl.centre + cl.half + slack;
                let within = (cl.first..=cl.last).all(|g| self.time(g) >= lo && self.time(g) <= hi);
                if !within {
                    return false;
                }
            }
            next = cl.last + 1;
        }
        next == self.base + self.times.len()
    }
}

/// Per-type jump times within the longest kernel horizon, with the cached
/// power-law sums needed to evaluate excitations.
#[derive(Clone, Debug)]
pub struct EventHistory<T> {
    /// One power sum per distinct (source, b, c, horizon) kernel shape.
    sums: Vec<PowerSum<T>>,
    /// For each target: (group, a) pairs.
    weights: Vec<Vec<(usize, T)>>,
    /// Groups fed by each source type.
    groups_of_source: Vec<Vec<usize>>,
    times: Vec<VecDeque<T>>,
    max_horizon: T,
    last_time: Option<T>,
    counts: [u64; NUM_EVENT_TYPES],
}

impl<T: Scalar> EventHistory<T> {
    pub fn new(spec: &HawkesSpec<T>) -> Self {
        let n = NUM_EVENT_TYPES;
        let mut sums: Vec<PowerSum<T>> = Vec::new();
        let mut weights = vec![Vec::new(); n];
        let mut groups_of_source = vec![Vec::new(); n];
        for source in 0..n {
            for target in 0..n {
                let k = spec.kernels[target * n + source];
                if k.is_zero() {
                    continue;
                }
                let existing = groups_of_source[source]
                    .iter()
                    .copied()
                    .find(|&g: &usize| sums[g].shape() == (k.b, k.c, k.horizon));
                let g = match existing {
                    Some(g) => g,
                    None => {
                        sums.push(PowerSum::new(k.b, k.c, k.horizon));
                        groups_of_source[source].push(sums.len() - 1);
                        sums.len() - 1
                    }
                };
                weights[target].push((g, k.a));
            }
        }
        EventHistory {
            sums,
            weights,
            groups_of_source,
            times: vec![VecDeque::new(); n],
            max_horizon: spec.max_horizon(),
            last_time: None,
            counts: [0; NUM_EVENT_TYPES],
        }
    }

    pub fn last_time(&self) -> Option<T> {
        self.last_time
    }

    pub fn counts(&self) -> &[u64; NUM_EVENT_TYPES] {
        &self.counts
    }

    pub fn group_count(&self) -> usize {
        self.sums.len()
    }

    /// Jump times of `e` that can still influence the future.
    pub fn recent_times(&self, e: EventType) -> &VecDeque<T> {
        &self.times[e.index()]
    }

    pub fn push(&mut self, e: EventType, t: T) -> Result<()> {
        if let Some(last) = self.last_time {
            if t < last {
                return Err(HawkesError::TimeOrder { query: t.to_f64_lossy(), last: last.to_f64_lossy() });
            }
        }
        let i = e.index();
        if let Some(&prev) = self.times[i].back() {
            if t <= prev {
                return Err(HawkesError::TimeOrder { query: t.to_f64_lossy(), last: prev.to_f64_lossy() });
            }
        }
        self.last_time = Some(t);
        self.counts[i] += 1;
        let q = &mut self.times[i];
        q.push_back(t);
        while let Some(&t0) = q.front() {
            if t - t0 > self.max_horizon {
                q.pop_front();
            } else {
                break;
            }
        }
        for &g in &self.groups_of_source[i] {
            self.sums[g].push(t);
        }
        Ok(())
    }

    /// Updates sums evaluated at `t` to include an event of type `e` at `t`.
    pub fn add_self_contribution(&self, e: EventType, sums: &mut [T]) {
        for &g in &self.groups_of_source[e.index()] {
            sums[g] = sums[g] + T::one();
        }
    }

    fn check_time(&self, t: T) -> Result<()> {
        match self.last_time {
            Some(last) if t < last => {
                Err(HawkesError::TimeOrder { query: t.to_f64_lossy(), last: last.to_f64_lossy() })
            }
            _ => Ok(()),
        }
    }

    /// Fills `out` with the cached group sums at `t`.
    pub fn group_sums(&mut self, t: T, out: &mut Vec<T>) -> Result<()> {
        self.check_time(t)?;
        out.clear();
        out.extend(self.sums.iter_mut().map(|s| s.eval(t)));
        Ok(())
    }

    /// Σ_j Σ_k φ^{j→i}(t − t_k) for every target i, split into the full
    /// excitation and its positive-kernel part.
    pub fn excitation_from_sums(&self, sums: &[T]) -> ([T; NUM_EVENT_TYPES], [T; NUM_EVENT_TYPES]) {
        let mut full = [T::zero(); NUM_EVENT_TYPES];
        let mut positive = [T::zero(); NUM_EVENT_TYPES];
        for (target, w) in self.weights.iter().enumerate() {
            for &(g, a) in w {
                let v = a * sums[g];
                full[target] = full[target] + v;
                if a > T::zero() {
                    positive[target] = positive[target] + v;
                }
            }
        }
        (full, positive)
    }

    pub fn excitation(&mut self, t: T) -> Result<[T; NUM_EVENT_TYPES]> {
        let mut sums = Vec::with_capacity(self.sums.len());
        self.group_sums(t, &mut sums)?;
        Ok(self.excitation_from_sums(&sums).0)
    }
}

/// Brute-force excitation over explicit per-type jump times.
pub fn excitation_direct<T: Scalar>(spec: &HawkesSpec<T>, times: &[Vec<T>], t: T) -> [T; NUM_EVENT_TYPES] {
    let n = NUM_EVENT_TYPES;
    let mut out = [T::zero(); NUM_EVENT_TYPES];
    for (target, slot) in out.iter_mut().enumerate() {
        for (source, ts) in times.iter().enumerate() {
            let k = &spec.kernels[target * n + source];
            if k.is_zero() {
                continue;
            }
            for &tk in ts {
                if tk < t {
                    *slot = *slot + k.value(t - tk);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_against_direct(b: f64, c: f64, h: f64, rate: f64, n: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ps = PowerSum::<f64>::new(b, c, h);
        let mut t = 0.0;
        for i in 0..n {
            t += -(1.0 - rng.random::<f64>()).ln() / rate;
            ps.push(t);
            if i % 7 == 0 {
                let q = t + rng.random::<f64>() * 3.0;
                let cached = ps.eval(q);
                let direct = ps.eval_direct(q);
                let rel = (cached - direct).abs() / direct.max(1e-300);
                assert!(rel < 1e-11, "b={b} c={c} i={i}: cached {cached} direct {direct} rel {rel}");
                t = q;
            }
        }
        assert!(ps.check_partition());
    }

    #[test]
    fn cached_sum_matches_direct() {
        check_against_direct(2.0, 1.0, 1000.0, 1.0, 5000, 1);
        check_against_direct(1.3, 10.0, 100.0, 5.0, 5000, 2);
        check_against_direct(4.0, 0.5, 50.0, 0.3, 3000, 3);
        check_against_direct(7.5, 3.0, f64::INFINITY, 2.0, 2000, 4);
    }

    #[test]
    fn clusters_stay_few() {
        let mut ps = PowerSum::<f64>::new(2.5, 5.0, 1000.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = 0.0;
        for _ in 0..20_000 {
            t += -(1.0 - rng.random::<f64>()).ln();
            ps.push(t);
        }
        assert!(ps.len() > 900);
        assert!(ps.cluster_count() < 80, "{} clusters", ps.cluster_count());
    }

    #[test]
    fn terms_needed_is_monotone_in_rho() {
        let a = terms_needed(2.5, 0.1, 1e-14).unwrap();
        let b = terms_needed(2.5, 0.3, 1e-14).unwrap();
        assert!(a < b);
    }
}
