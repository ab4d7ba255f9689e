//! Dependence of event types on a state variable: P(e, v) / (P(e) P(v)).

use std::collections::BTreeMap;

use mqh_core::{EventType, SideState};
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticsError, Result};
use crate::log::EventLog;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCell {
    pub event: EventType,
    /// Bin index into the table's edges.
    pub bin: usize,
    pub count: u64,
    /// `None` when the event type or the bin is never observed.
    pub ratio: Option<f64>,
    /// 95% binomial band of the ratio under independence.
    pub band: Option<(f64, f64)>,
    /// Fewer joint observations than the configured minimum.
    pub undersampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceTable {
    /// Bin i covers [edges[i], edges[i + 1]); values past the ends are clamped.
    pub edges: Vec<f64>,
    pub total: u64,
    pub cells: Vec<IndependenceCell>,
}

impl IndependenceTable {
    pub fn cell(&self, event: EventType, bin: usize) -> Option<&IndependenceCell> {
        self.cells.iter().find(|c| c.event == event && c.bin == bin)
    }
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    let n = edges.len() - 1;
    edges[1..].iter().position(|&e| v < e).unwrap_or(n - 1).min(n - 1)
}

/// Ratio table from (event, value) observations.
pub fn independence_from_pairs(pairs: &[(EventType, f64)], edges: &[f64], min_count: u64) -> Result<IndependenceTable> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(AnalyticsError::Domain("bin edges must be increasing with at least two entries".into()));
    }
    let nb = edges.len() - 1;
    let mut joint: BTreeMap<(EventType, usize), u64> = BTreeMap::new();
    let mut by_event = [0u64; 12];
    let mut by_bin = vec![0u64; nb];
    for &(e, v) in pairs {
        let b = bin_of(edges, v);
        *joint.entry((e, b)).or_insert(0) += 1;
        by_event[e.index()] += 1;
        by_bin[b] += 1;
    }
    let total = pairs.len() as u64;
    let mut cells = Vec::with_capacity(12 * nb);
    for e in EventType::ALL {
        for b in 0..nb {
            let count = joint.get(&(e, b)).copied().unwrap_or(0);
            let (ne, nv) = (by_event[e.index()], by_bin[b]);
            let defined = ne > 0 && nv > 0;
            let ratio = defined.then(|| count as f64 * total as f64 / (ne as f64 * nv as f64));
            let band = defined.then(|| {
                let p = ne as f64 / total as f64;
                let half = 1.96 * (p * (1.0 - p) / nv as f64).sqrt() / p;
                ((1.0 - half).max(0.0), 1.0 + half)
            });
            cells.push(IndependenceCell { event: e, bin: b, count, ratio, band, undersampled: count < min_count });
        }
    }
    Ok(IndependenceTable { edges: edges.to_vec(), total, cells })
}

/// Ratio table over all events of a log, with the variable read from the
/// book each event finds.
pub fn independence_ratio<F>(log: &EventLog, extract: F, edges: &[f64], min_count: u64) -> Result<IndependenceTable>
where
    F: Fn(EventType, &SideState, &SideState) -> f64,
{
    let pairs: Vec<(EventType, f64)> =
        log.with_pre_state().map(|(bid, ask, r)| (r.event_type, extract(r.event_type, &bid, &ask))).collect();
    if pairs.is_empty() {
        return Err(AnalyticsError::Insufficient("log has no events".into()));
    }
    independence_from_pairs(&pairs, edges, min_count)
}
