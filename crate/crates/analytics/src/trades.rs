//! Mid-price moves caused by market orders and market order sizes relative
//! to the best queue.

use std::collections::BTreeMap;

use mqh_core::{OrderKind, Side};
use serde::{Deserialize, Serialize};

use crate::log::EventLog;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeMidChanges {
    /// |Δp_mid| in ticks for every market order that moved the mid.
    pub changes_ticks: Vec<f64>,
    /// Count per |Δp_mid| in half ticks.
    pub histogram: BTreeMap<i64, u64>,
    /// ⟨r_mid⟩ in currency.
    pub mean_currency: f64,
    /// Market orders that left the mid unchanged.
    pub n_zero: u64,
}

/// Absolute mid moves across market orders only. Moves from other event
/// types are not attributed to trades. Returns `None` when the log has no
/// market order that moved the mid.
pub fn trade_mid_changes(log: &EventLog) -> Option<TradeMidChanges> {
    let mut changes = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut n_zero = 0;
    for r in &log.records {
        if r.event_type.kind() != OrderKind::Market {
            continue;
        }
        let d = (r.mid_after().half_ticks() - r.mid_before.half_ticks()).abs();
        if d == 0 {
            n_zero += 1;
            continue;
        }
        *histogram.entry(d).or_insert(0) += 1;
        changes.push(d as f64 / 2.0);
    }
    if changes.is_empty() {
        return None;
    }
    let mean_ticks = changes.iter().sum::<f64>() / changes.len() as f64;
    Some(TradeMidChanges { changes_ticks: changes, histogram, mean_currency: mean_ticks * log.tick_size, n_zero })
}

/// κ_MO / Q_T with Q_T the opposite best queue just before each market order.
pub fn mo_to_best_ratio(log: &EventLog) -> Vec<f64> {
    log.with_pre_state()
        .filter(|(_, _, r)| r.event_type.kind() == OrderKind::Market)
        .filter_map(|(bid, ask, r)| {
            // a market order on the ask side consumes the ask queue
            let q = match r.event_type.side() {
                Side::Ask => ask.q_top,
                Side::Bid => bid.q_top,
            };
            (q > 0).then(|| r.size as f64 / q as f64)
        })
        .collect()
}

/// Normalized histogram with `bins` equal bins on [0, max].
pub fn density(values: &[f64], bins: usize, max: f64) -> Vec<(f64, f64)> {
    if values.is_empty() || bins == 0 || !(max > 0.0) {
        return Vec::new();
    }
    let w = max / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut n = 0u64;
    for &v in values {
        if v >= 0.0 && v <= max {
            counts[((v / w) as usize).min(bins - 1)] += 1;
            n += 1;
        }
    }
    if n == 0 {
        return Vec::new();
    }
    counts.iter().enumerate().map(|(i, &c)| ((i as f64 + 0.5) * w, c as f64 / (n as f64 * w))).collect()
}
