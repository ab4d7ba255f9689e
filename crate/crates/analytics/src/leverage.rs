//! Conditional probability leverage of consecutive events.

use std::collections::BTreeMap;

use mqh_core::{EventRecord, MetaQueue, OrderKind, Side};
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Lo,
    Is,
    Co,
    Mo,
}

impl Family {
    pub fn of(record: &EventRecord) -> Family {
        match (record.event_type.kind(), record.event_type.queue()) {
            (OrderKind::Market, _) => Family::Mo,
            (OrderKind::Cancel, _) => Family::Co,
            (OrderKind::Limit, MetaQueue::InSpread) => Family::Is,
            (OrderKind::Limit, _) => Family::Lo,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::Lo => "LO",
            Family::Is => "IS",
            Family::Co => "CO",
            Family::Mo => "MO",
        }
    }
}

/// Offset bins: unit bins from 0 to 10 ticks, then logarithmic bins up to
/// `upper`. Offsets past the last edge fall in the last bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeverageAxis {
    pub edges: Vec<f64>,
}

impl LeverageAxis {
    pub const LINEAR_LIMIT: f64 = 10.0;

    pub fn new(upper: f64, log_bins: usize) -> Result<Self> {
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(AnalyticsError::Domain(format!("axis upper edge must be positive, got {upper}")));
        }
        let mut edges: Vec<f64> = (0..=Self::LINEAR_LIMIT as i64).map(|v| v as f64).collect();
        if upper > Self::LINEAR_LIMIT && log_bins > 0 {
            let r = (upper / Self::LINEAR_LIMIT).powf(1.0 / log_bins as f64);
            for k in 1..=log_bins {
                edges.push(Self::LINEAR_LIMIT * r.powi(k as i32));
            }
        }
        Ok(LeverageAxis { edges })
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn bin(&self, offset: f64) -> usize {
        let n = self.bins();
        self.edges[1..].iter().position(|&e| offset < e).unwrap_or(n - 1).min(n - 1)
    }
}

/// Event family, side and offset bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub family: Family,
    pub side: Side,
    pub bin: usize,
}

impl Cell {
    /// Signed offset position of the cell: ask positive, bid negative.
    pub fn signed_bin(&self) -> i64 {
        match self.side {
            Side::Ask => self.bin as i64,
            Side::Bid => -(self.bin as i64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition<K> {
    pub from: K,
    pub to: K,
    pub count: u64,
    /// P(to | from) / P(to); `None` if either marginal is empty.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeverageTable<K> {
    pub pairs: u64,
    pub from_counts: BTreeMap<K, u64>,
    pub to_counts: BTreeMap<K, u64>,
    pub transitions: Vec<Transition<K>>,
}

impl<K: Ord + Clone> LeverageTable<K> {
    pub fn ratio(&self, from: &K, to: &K) -> Option<f64> {
        self.transitions.iter().find(|t| &t.from == from && &t.to == to).and_then(|t| t.ratio)
    }
}

/// Leverage ratios over consecutive pairs of a sequence of keys. Every
/// combination of keys seen as first and as second element is reported,
/// including pairs that never occur (ratio 0).
pub fn leverage_from_sequence<K: Ord + Clone>(seq: &[K]) -> LeverageTable<K> {
    let mut joint: BTreeMap<(K, K), u64> = BTreeMap::new();
    let mut from_counts: BTreeMap<K, u64> = BTreeMap::new();
    let mut to_counts: BTreeMap<K, u64> = BTreeMap::new();
    for w in seq.windows(2) {
        *joint.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        *from_counts.entry(w[0].clone()).or_insert(0) += 1;
        *to_counts.entry(w[1].clone()).or_insert(0) += 1;
    }
    let pairs = seq.len().saturating_sub(1) as u64;
    let mut transitions = Vec::with_capacity(from_counts.len() * to_counts.len());
    for (a, &na) in &from_counts {
        for (b, &nb) in &to_counts {
            let count = joint.get(&(a.clone(), b.clone())).copied().unwrap_or(0);
            let ratio = (na > 0 && nb > 0).then(|| count as f64 * pairs as f64 / (na as f64 * nb as f64));
            transitions.push(Transition { from: a.clone(), to: b.clone(), count, ratio });
        }
    }
    LeverageTable { pairs, from_counts, to_counts, transitions }
}

pub type LeverageGrid = LeverageTable<Cell>;

/// Cell of one event: market orders sit at offset 0, other events at their
/// distance from the same-side best.
pub fn cell_of(record: &EventRecord, axis: &LeverageAxis) -> Cell {
    let family = Family::of(record);
    let offset = if family == Family::Mo { 0 } else { record.offset_ticks.abs() };
    Cell { family, side: record.event_type.side(), bin: axis.bin(offset as f64) }
}

pub fn leverage_grid(records: &[EventRecord], axis: &LeverageAxis) -> LeverageGrid {
    let cells: Vec<Cell> = records.iter().map(|r| cell_of(r, axis)).collect();
    leverage_from_sequence(&cells)
}
