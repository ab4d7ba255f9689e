//! Kernel norms from a vector autoregression of binned event counts.
//!
//! Counts in each bin are regressed on the counts of every type over a set of
//! lag windows whose lengths grow geometrically. The coefficient of window k
//! estimates φ(lag) times the bin width, so the norm of a kernel is the sum of
//! coefficients weighted by window lengths. Excitation within a single bin is
//! not captured, which biases norms down by roughly half the kernel mass on
//! [0, bin width].

use mqh_analytics::EventLog;
use mqh_core::NUM_EVENT_TYPES;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CalibrationError, Result};

const N: usize = NUM_EVENT_TYPES;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub bin_width: f64,
    /// Lag window edges in bins: window k covers lags [edges[k], edges[k + 1]).
    pub lag_edges: Vec<usize>,
    /// norms[target][source], negative values clipped to 0.
    pub norms: Vec<Vec<f64>>,
    pub spectral_radius: f64,
    /// Baseline rate per type.
    pub baseline: Vec<f64>,
    /// kernel_values[k][target][source]: estimated φ on window k, per second.
    pub kernel_values: Vec<Vec<Vec<f64>>>,
    pub bins: usize,
    pub regularized: bool,
}

/// Lag windows 1, 2, 3, 4, 6, 8, 12, ... bins, stopping once `lag_count`
/// windows are formed.
pub fn geometric_lag_edges(lag_count: usize) -> Vec<usize> {
    let mut edges = vec![1usize];
    let mut k = 0;
    while edges.len() <= lag_count {
        let last = *edges.last().unwrap();
        let next = if last < 4 { last + 1 } else if k % 2 == 0 { last * 3 / 2 } else { last * 4 / 3 };
        if last >= 4 {
            k += 1;
        }
        edges.push(next.max(last + 1));
    }
    edges
}

/// Fits the binned VAR. `ridge` is added to the diagonal of the normal
/// equations when they cannot be solved as they are.
pub fn estimate_kernels_binned(log: &EventLog, bin_width: f64, lag_count: usize, ridge: f64) -> Result<KernelEstimate> {
    log.validate()?;
    if !(bin_width > 0.0) || lag_count == 0 {
        return Err(CalibrationError::Domain("bin width and lag count must be positive".into()));
    }
    let bins = (log.duration() / bin_width).floor() as usize;
    let edges = geometric_lag_edges(lag_count);
    let max_lag = *edges.last().unwrap();
    if bins < 10 * max_lag {
        return Err(CalibrationError::Insufficient(format!(
            "{bins} bins are too few for lags spanning {max_lag} bins"
        )));
    }
    let mut counts = vec![[0u32; N]; bins];
    for r in &log.records {
        let b = ((r.time - log.start) / bin_width) as usize;
        if b < bins {
            counts[b][r.event_type.index()] += 1;
        }
    }
    // prefix[t][j] = Σ_{u < t} counts[u][j]
    let mut prefix = vec![[0u64; N]; bins + 1];
    for t in 0..bins {
        for j in 0..N {
            prefix[t + 1][j] = prefix[t][j] + counts[t][j] as u64;
        }
    }
    let windows = edges.len() - 1;
    let p = 1 + N * windows;
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xty = DMatrix::<f64>::zeros(p, N);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(p);
    for t in max_lag..bins {
        row.clear();
        row.push((0, 1.0));
        for k in 0..windows {
            // lags [edges[k], edges[k+1]) are bins [t - edges[k+1] + 1, t - edges[k]]
            let hi = t + 1 - edges[k];
            let lo = t + 1 - edges[k + 1];
            for j in 0..N {
                let v = prefix[hi][j] - prefix[lo][j];
                if v > 0 {
                    row.push((1 + k * N + j, v as f64));
                }
            }
        }
        for (ai, &(a, va)) in row.iter().enumerate() {
            for &(b, vb) in &row[ai..] {
                xtx[(a, b)] += va * vb;
            }
            for i in 0..N {
                let y = counts[t][i];
                if y > 0 {
                    xty[(a, i)] += va * y as f64;
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    let (coef, regularized) = match xtx.clone().cholesky() {
        Some(ch) => (ch.solve(&xty), false),
        None => {
            log::warn!("singular design in the binned kernel fit, adding ridge {ridge}");
            let mut reg = xtx;
            for a in 1..p {
                reg[(a, a)] += ridge.max(1e-9);
            }
            let ch = reg.cholesky().ok_or_else(|| CalibrationError::Domain("regularized design is still singular".into()))?;
            (ch.solve(&xty), true)
        }
    };
    let mut norms = vec![vec![0.0; N]; N];
    let mut kernel_values = vec![vec![vec![0.0; N]; N]; windows];
    for i in 0..N {
        for j in 0..N {
            let mut total = 0.0;
            for k in 0..windows {
                let c = coef[(1 + k * N + j, i)];
                kernel_values[k][i][j] = c / bin_width;
                total += c * (edges[k + 1] - edges[k]) as f64;
            }
            norms[i][j] = total.max(0.0);
        }
    }
    let baseline = (0..N).map(|i| coef[(0, i)] / bin_width).collect();
    let spectral_radius = mqh_hawkes::spectral_radius(&norms);
    Ok(KernelEstimate { bin_width, lag_edges: edges, norms, spectral_radius, baseline, kernel_values, bins, regularized })
}
