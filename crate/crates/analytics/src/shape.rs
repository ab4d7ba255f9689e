//! Average shape of the book and the instantaneous-vs-average distance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::book::{BookView, Resolution};
use crate::error::{AnalyticsError, Result};

/// Normalized volume per tick bin measured from the mid; `mass[k - 1]` is the
/// share in bin k, i.e. at (k − 1, k] ticks. Bid and ask are combined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeProfile {
    pub mass: Vec<f64>,
    pub resolution: Resolution,
}

/// Reported position of bin k, in ticks.
pub fn bin_centre(k: usize) -> f64 {
    k as f64 - 0.5
}

impl ShapeProfile {
    /// Smallest bin whose cumulative mass reaches `q`, reported at its centre.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for (i, m) in self.mass.iter().enumerate() {
            acc += m;
            if acc >= q - 1e-12 {
                return bin_centre(i + 1);
            }
        }
        bin_centre(self.mass.len())
    }

    pub fn quartiles(&self) -> [f64; 3] {
        [self.quantile(0.25), self.quantile(0.5), self.quantile(0.75)]
    }

    /// Position of the largest mass (first one on ties).
    pub fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, m) in self.mass.iter().enumerate() {
            if *m > self.mass[best] {
                best = i;
            }
        }
        bin_centre(best + 1)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// q(x, t): one book normalized to unit mass, as a sparse bin map.
pub fn instantaneous_shape(book: &BookView) -> Option<BTreeMap<usize, f64>> {
    let levels = book.binned_levels();
    let total: i64 = levels.iter().map(|l| l.1).sum();
    if total <= 0 {
        return None;
    }
    let mut out = BTreeMap::new();
    for (bin, q) in levels {
        *out.entry(bin).or_insert(0.0) += q as f64 / total as f64;
    }
    Some(out)
}

/// Time-weighted average of the normalized instantaneous shapes. Books with
/// no volume carry no weight.
pub fn average_shape<'a, I>(books: I, resolution: Resolution) -> Result<ShapeProfile>
where
    I: IntoIterator<Item = (&'a BookView, f64)>,
{
    let mut acc: Vec<f64> = Vec::new();
    let mut weight = 0.0;
    for (book, w) in books {
        if w <= 0.0 {
            continue;
        }
        let Some(q) = instantaneous_shape(book) else { continue };
        for (bin, m) in q {
            if acc.len() < bin {
                acc.resize(bin, 0.0);
            }
            acc[bin - 1] += w * m;
        }
        weight += w;
    }
    if weight <= 0.0 {
        return Err(AnalyticsError::Domain("no book with positive volume and duration".into()));
    }
    for m in acc.iter_mut() {
        *m /= weight;
    }
    Ok(ShapeProfile { mass: acc, resolution })
}

/// Σ_x |q̄(x) − q(x)| with unit bin width.
pub fn wasserstein_l1(avg: &[f64], inst: &BTreeMap<usize, f64>) -> f64 {
    let mut d = 0.0;
    let mut covered = 0.0;
    for (i, a) in avg.iter().enumerate() {
        let q = inst.get(&(i + 1)).copied().unwrap_or(0.0);
        d += (a - q).abs();
        covered += q;
    }
    let outside: f64 = inst.values().sum::<f64>() - covered;
    d + outside.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    /// empty_levels[i][n]: time share with n empty levels between ranks i + 1
    /// and i + 2 (both sides added).
    pub empty_levels: Vec<BTreeMap<i64, f64>>,
    pub wasserstein_mean: f64,
    pub wasserstein_variance: f64,
}

/// Empty-level distributions and the time-weighted mean and variance of the
/// distance between instantaneous and average shapes.
pub fn sparsity_metrics<'a, I>(books: I, avg: &ShapeProfile, max_rank: usize) -> Result<SparsityReport>
where
    I: IntoIterator<Item = (&'a BookView, f64)>,
{
    let mut hist: Vec<BTreeMap<i64, f64>> = vec![BTreeMap::new(); max_rank];
    let (mut w_sum, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (book, w) in books {
        if w <= 0.0 {
            continue;
        }
        let Some(q) = instantaneous_shape(book) else { continue };
        let l = wasserstein_l1(&avg.mass, &q);
        w_sum += w;
        m1 += w * l;
        m2 += w * l * l;
        for (i, n) in book.empty_levels(max_rank).into_iter().enumerate() {
            *hist[i].entry(n).or_insert(0.0) += w;
        }
    }
    if w_sum <= 0.0 {
        return Err(AnalyticsError::Insufficient("no book with positive volume and duration".into()));
    }
    for h in hist.iter_mut() {
        for v in h.values_mut() {
            *v /= w_sum;
        }
    }
    let mean = m1 / w_sum;
    Ok(SparsityReport { empty_levels: hist, wasserstein_mean: mean, wasserstein_variance: (m2 / w_sum - mean * mean).max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mqh_core::TickPrice;

    fn view(bid: &[(i64, i64)], ask: &[(i64, i64)]) -> BookView {
        let f = |v: &[(i64, i64)]| v.iter().map(|&(p, q)| (TickPrice::from_half_ticks(p), q)).collect();
        BookView { bid: f(bid), ask: f(ask) }
    }

    #[test]
    fn single_book_at_half_a_tick() {
        let b = view(&[(200, 10)], &[(202, 30)]);
        let s = average_shape([(&b, 1.0)], Resolution::PriceLevel).unwrap();
        assert_eq!(s.mass, vec![1.0]);
        assert_eq!(s.argmax(), 0.5);
        assert_eq!(s.quartiles(), [0.5, 0.5, 0.5]);
    }

    #[test]
    fn two_books_average_to_halves() {
        // spread 2: bests one tick from the mid
        let a = view(&[(200, 10)], &[(204, 10)]);
        let b = view(&[(198, 10)], &[(206, 10)]);
        let mut b2 = b.clone();
        b2.bid[0].0 = TickPrice::from_half_ticks(198);
        let s = average_shape([(&a, 1.0), (&b, 1.0)], Resolution::PriceLevel).unwrap();
        assert_eq!(s.mass, vec![0.5, 0.5]);
        assert!((s.total() - 1.0).abs() < 1e-12);
        let inst = instantaneous_shape(&a).unwrap();
        assert_eq!(wasserstein_l1(&s.mass, &inst), 1.0);
        assert_eq!(wasserstein_l1(&[1.0], &inst), 0.0);
    }

    #[test]
    fn empty_books_are_rejected() {
        let e = view(&[], &[]);
        assert!(average_shape([(&e, 1.0)], Resolution::PriceLevel).is_err());
    }

    #[test]
    fn dense_book_has_no_empty_levels() {
        let b = view(&[(200, 1), (198, 1), (196, 1)], &[(202, 1), (204, 1), (206, 1)]);
        let avg = average_shape([(&b, 1.0)], Resolution::PriceLevel).unwrap();
        let r = sparsity_metrics([(&b, 2.0)], &avg, 2).unwrap();
        assert_eq!(r.empty_levels[0], BTreeMap::from([(0, 1.0)]));
        assert_eq!(r.empty_levels[1], BTreeMap::from([(0, 1.0)]));
        assert_eq!(r.wasserstein_mean, 0.0);
    }
}
