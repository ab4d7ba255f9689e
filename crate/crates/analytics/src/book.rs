//! Occupied price levels of a book, from either a meta-queue state or a
//! level-resolved snapshot.

use mqh_core::{Side, SideState, TickPrice};
use serde::{Deserialize, Serialize};

/// How volume is placed on price levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Each meta-queue's volume sits at its best level.
    MetaQueue,
    /// Every price level is observed.
    PriceLevel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookView {
    /// Occupied bid levels, best first.
    pub bid: Vec<(TickPrice, i64)>,
    /// Occupied ask levels, best first.
    pub ask: Vec<(TickPrice, i64)>,
}

impl BookView {
    /// Meta-queue volumes placed at the best level of each meta-queue.
    pub fn from_meta_queues(bid: &SideState, ask: &SideState) -> Self {
        let levels = |s: &SideState, side: Side| {
            let mut v = Vec::with_capacity(2);
            if s.q_top > 0 {
                v.push((s.best_price, s.q_top));
            }
            if s.q_deep > 0 {
                v.push((s.deep_price(side), s.q_deep));
            }
            v
        };
        BookView { bid: levels(bid, Side::Bid), ask: levels(ask, Side::Ask) }
    }

    pub fn side(&self, side: Side) -> &[(TickPrice, i64)] {
        match side {
            Side::Bid => &self.bid,
            Side::Ask => &self.ask,
        }
    }

    /// Twice the mid price in half ticks, if both sides are quoted.
    fn mid_twice(&self) -> Option<i64> {
        let b = self.bid.first()?.0.half_ticks();
        let a = self.ask.first()?.0.half_ticks();
        Some(a + b)
    }

    pub fn total_volume(&self) -> i64 {
        self.bid.iter().chain(&self.ask).map(|l| l.1).sum()
    }

    /// (tick bin, volume) for every level. A level d half ticks from the mid
    /// falls in bin ⌈d / 2⌉, so bin k covers (k − 1, k] ticks.
    pub fn binned_levels(&self) -> Vec<(usize, i64)> {
        let Some(mid2) = self.mid_twice() else { return Vec::new() };
        let mut out = Vec::with_capacity(self.bid.len() + self.ask.len());
        for side in Side::BOTH {
            for &(p, q) in self.side(side) {
                // distance from the mid in quarter ticks, then half ticks rounded up
                let quarter = (2 * p.half_ticks() - mid2) * side.away();
                let half = (quarter + 1).div_euclid(2);
                let bin = ((half + 1).div_euclid(2)).max(1) as usize;
                out.push((bin, q));
            }
        }
        out
    }

    /// Empty price levels between the quotes ranked i and i + 1, summed over
    /// both sides, for i = 1..=max_rank. Ranks missing on a side count zero.
    pub fn empty_levels(&self, max_rank: usize) -> Vec<i64> {
        let mut out = vec![0; max_rank];
        for side in Side::BOTH {
            let levels = self.side(side);
            for (i, w) in levels.windows(2).take(max_rank).enumerate() {
                let gap = ((w[1].0.half_ticks() - w[0].0.half_ticks()).abs()) / 2 - 1;
                out[i] += gap.max(0);
            }
        }
        out
    }
}
