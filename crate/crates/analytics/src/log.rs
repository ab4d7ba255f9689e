//! An event log: initial book, time window and the post-event records.

use mqh_core::{EventRecord, LobState, SideState};
use serde::{Deserialize, Serialize};

use crate::error::{AnalyticsError, Result};
use crate::series::WeightedSeries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub start: f64,
    pub end: f64,
    pub tick_size: f64,
    pub m_half_depth: i64,
    pub initial: LobState,
    pub records: Vec<EventRecord>,
}

/// Book sides in force over one time segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub duration: f64,
    pub bid: SideState,
    pub ask: SideState,
}

impl Segment {
    pub fn spread_ticks(&self) -> i64 {
        (self.ask.best_price.half_ticks() - self.bid.best_price.half_ticks()).div_euclid(2)
    }
}

impl EventLog {
    pub fn validate(&self) -> Result<()> {
        if !(self.end > self.start) {
            return Err(AnalyticsError::Domain(format!("log window [{}, {}] is empty", self.start, self.end)));
        }
        let mut last = self.start;
        for (i, r) in self.records.iter().enumerate() {
            if r.time < last || r.time > self.end {
                return Err(AnalyticsError::Domain(format!("record {i} at t = {} is out of order", r.time)));
            }
            last = r.time;
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// The book before each record: (pre-event bid, pre-event ask, record).
    pub fn with_pre_state(&self) -> impl Iterator<Item = (SideState, SideState, &EventRecord)> + '_ {
        let mut prev = (self.initial.bid, self.initial.ask);
        self.records.iter().map(move |r| {
            let out = (prev.0, prev.1, r);
            prev = (r.bid, r.ask);
            out
        })
    }

    /// Piecewise-constant book states over [start, end], zero-length ones dropped.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        let mut t = self.start;
        let mut cur = (self.initial.bid, self.initial.ask);
        for r in &self.records {
            if r.time > t {
                out.push(Segment { start: t, duration: r.time - t, bid: cur.0, ask: cur.1 });
                t = r.time;
            }
            cur = (r.bid, r.ask);
        }
        if self.end > t {
            out.push(Segment { start: t, duration: self.end - t, bid: cur.0, ask: cur.1 });
        }
        out
    }

    /// s(t) in ticks.
    pub fn spread_series(&self) -> Result<WeightedSeries<f64>> {
        let steps = std::iter::once((self.start, self.initial.spread_ticks() as f64))
            .chain(self.records.iter().map(|r| (r.time, r.spread_after() as f64)));
        WeightedSeries::from_steps(steps, self.end)
    }

    /// Values of a state variable sampled after every event.
    pub fn sample_after_events<F: Fn(&SideState, &SideState) -> f64>(&self, f: F) -> Vec<f64> {
        self.records.iter().map(|r| f(&r.bid, &r.ask)).collect()
    }
}
