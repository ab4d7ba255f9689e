//! Geometric fits of offsets, order sizes and deep volumes.

use mqh_analytics::EventLog;
use mqh_core::{fit_geometric_mle, fit_truncated_geometric_mle, GeomFit, MetaQueue, OrderKind, Side, TruncatedObs};
use serde::{Deserialize, Serialize};

use crate::error::{CalibrationError, Result};

pub const DEFAULT_MIN_OBS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFit {
    pub n: usize,
    /// `None` when the family has fewer observations than required.
    pub fit: Option<GeomFit>,
    pub ci95: Option<(f64, f64)>,
    pub flagged: bool,
}

impl FamilyFit {
    fn from_result(n: usize, min_obs: usize, fit: impl FnOnce() -> mqh_core::Result<GeomFit>) -> Result<Self> {
        if n < min_obs.max(1) {
            return Ok(FamilyFit { n, fit: None, ci95: None, flagged: true });
        }
        let f = fit()?;
        let ci = ((f.p - 1.96 * f.std_err).max(0.0), (f.p + 1.96 * f.std_err).min(1.0));
        Ok(FamilyFit { n, fit: Some(f), ci95: Some(ci), flagged: false })
    }

    pub fn p(&self) -> Option<f64> {
        self.fit.map(|f| f.p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaFits {
    pub eta_is: FamilyFit,
    pub eta_t: FamilyFit,
    pub eta_t1: FamilyFit,
}

/// Truncated geometric MLE of the three offsets, each observation carrying
/// the bounds it was drawn under: [1, s − 1] for in-spread orders, [0, m_T − 1]
/// for top limit orders and [1, m_D] for the width of a new top after a
/// single depletion.
pub fn calibrate_eta(log: &EventLog, min_obs: usize) -> Result<EtaFits> {
    let mut is = Vec::new();
    let mut top = Vec::new();
    let mut t1 = Vec::new();
    for (bid, ask, r) in log.with_pre_state() {
        let e = r.event_type;
        let side = e.side();
        let pre = match side {
            Side::Bid => bid,
            Side::Ask => ask,
        };
        let post = r.side_after(side);
        let s = (ask.best_price.half_ticks() - bid.best_price.half_ticks()).div_euclid(2);
        match (e.kind(), e.queue()) {
            (OrderKind::Limit, MetaQueue::InSpread) if s >= 2 && r.offset_ticks >= 1 && r.offset_ticks <= s - 1 => {
                is.push(TruncatedObs { value: r.offset_ticks, lo: 1, hi: s - 1 });
            }
            (OrderKind::Limit, MetaQueue::Top) if pre.m_top >= 1 && (0..pre.m_top).contains(&r.offset_ticks) => {
                top.push(TruncatedObs { value: r.offset_ticks, lo: 0, hi: pre.m_top - 1 });
            }
            (OrderKind::Cancel, MetaQueue::Top) | (OrderKind::Market, _) if r.depleted_levels == 1 => {
                // the best moved by the old top width; otherwise the boundary refilled it in place
                let moved = (post.best_price.half_ticks() - pre.best_price.half_ticks()).abs() / 2;
                if moved == pre.m_top && pre.m_deep >= 1 && (1..=pre.m_deep).contains(&post.m_top) {
                    t1.push(TruncatedObs { value: post.m_top, lo: 1, hi: pre.m_deep });
                }
            }
            _ => {}
        }
    }
    Ok(EtaFits {
        eta_is: FamilyFit::from_result(is.len(), min_obs, || fit_truncated_geometric_mle(&is))?,
        eta_t: FamilyFit::from_result(top.len(), min_obs, || fit_truncated_geometric_mle(&top))?,
        eta_t1: FamilyFit::from_result(t1.len(), min_obs, || fit_truncated_geometric_mle(&t1))?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaFits {
    pub kappa_is: FamilyFit,
    pub kappa_t: FamilyFit,
    pub kappa_mo: FamilyFit,
    pub kappa_d: FamilyFit,
    /// All limit order sizes together.
    pub pooled_limit: FamilyFit,
}

/// Geometric MLE of order sizes. Cancellation sizes are capped by the queue
/// they hit and are not used.
pub fn calibrate_kappa(log: &EventLog, min_obs: usize) -> Result<KappaFits> {
    let mut by = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for r in &log.records {
        let slot = match (r.event_type.kind(), r.event_type.queue()) {
            (OrderKind::Limit, MetaQueue::InSpread) => 0,
            (OrderKind::Limit, MetaQueue::Top) => 1,
            (OrderKind::Market, _) => 2,
            (OrderKind::Limit, MetaQueue::Deep) => 3,
            _ => continue,
        };
        if r.size >= 1 {
            by[slot].push(r.size);
        }
    }
    let pooled: Vec<i64> = by[0].iter().chain(&by[1]).chain(&by[3]).copied().collect();
    let f = |v: &Vec<i64>| FamilyFit::from_result(v.len(), min_obs, || fit_geometric_mle(v));
    Ok(KappaFits { kappa_is: f(&by[0])?, kappa_t: f(&by[1])?, kappa_mo: f(&by[2])?, kappa_d: f(&by[3])?, pooled_limit: f(&pooled)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepVolumeFit {
    /// Time-weighted mean deep volume per level.
    pub mean_per_level: f64,
    /// Geometric parameter with that mean.
    pub q_hat: f64,
}

/// Q̂_D from the deep meta-queues of both sides over time.
pub fn calibrate_deep_volume(log: &EventLog) -> Result<DeepVolumeFit> {
    let (mut num, mut den) = (0.0, 0.0);
    for seg in log.segments() {
        for s in [seg.bid, seg.ask] {
            if s.m_deep >= 1 && s.q_deep >= 1 {
                num += seg.duration * s.q_deep as f64 / s.m_deep as f64;
                den += seg.duration;
            }
        }
    }
    if den <= 0.0 {
        return Err(CalibrationError::Insufficient("no deep meta-queue observed".into()));
    }
    let mean = num / den;
    Ok(DeepVolumeFit { mean_per_level: mean, q_hat: (1.0 / mean).min(1.0) })
}
