//! Sources of the random marks (offsets, sizes, unseen volumes) consumed by
//! the handlers. Draws can be recorded and replayed, which lets a log be
//! re-run exactly under a relabelling of sides.

use mqh_core::{sample_bounded, sample_deep_volume};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::HandlerConfig;
use crate::error::{DynamicsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    EtaInSpread,
    EtaTop,
    EtaNewTop,
    KappaInSpread,
    KappaTop,
    KappaMarket,
    KappaDeep,
}

pub trait MarkSource {
    /// A draw of `mark` conditioned on [lo, hi].
    fn bounded(&mut self, mark: Mark, lo: i64, hi: i64) -> Result<i64>;

    /// An unconditioned draw of `mark`.
    fn draw(&mut self, mark: Mark) -> Result<i64> {
        self.bounded(mark, i64::MIN, i64::MAX)
    }

    /// Unseen volume of a deep meta-queue of the given width.
    fn deep_volume(&mut self, width: i64) -> Result<i64>;
}

pub struct SampledMarks<'a, R: ?Sized> {
    pub config: &'a HandlerConfig,
    pub rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> SampledMarks<'a, R> {
    pub fn new(config: &'a HandlerConfig, rng: &'a mut R) -> Self {
        SampledMarks { config, rng }
    }
}

impl<R: Rng + ?Sized> MarkSource for SampledMarks<'_, R> {
    fn bounded(&mut self, mark: Mark, lo: i64, hi: i64) -> Result<i64> {
        let c = self.config;
        let dist = match mark {
            Mark::EtaInSpread => &c.eta_is,
            Mark::EtaTop => &c.eta_t,
            Mark::EtaNewTop => &c.eta_t1,
            Mark::KappaInSpread => &c.kappa_is,
            Mark::KappaTop => &c.kappa_t,
            Mark::KappaMarket => &c.kappa_mo,
            Mark::KappaDeep => &c.kappa_d,
        };
        if lo == i64::MIN && hi == i64::MAX {
            return Ok(dist.sample(self.rng));
        }
        Ok(sample_bounded(dist, lo, hi, self.rng)?)
    }

    fn deep_volume(&mut self, width: i64) -> Result<i64> {
        Ok(sample_deep_volume(&self.config.deep_volume, width, self.rng)?)
    }
}

/// Wraps a source and keeps every value it hands out.
pub struct RecordingMarks<M> {
    pub inner: M,
    pub tape: Vec<i64>,
}

impl<M: MarkSource> RecordingMarks<M> {
    pub fn new(inner: M) -> Self {
        RecordingMarks { inner, tape: Vec::new() }
    }
}

impl<M: MarkSource> MarkSource for RecordingMarks<M> {
    fn bounded(&mut self, mark: Mark, lo: i64, hi: i64) -> Result<i64> {
        let v = self.inner.bounded(mark, lo, hi)?;
        self.tape.push(v);
        Ok(v)
    }

    fn deep_volume(&mut self, width: i64) -> Result<i64> {
        let v = self.inner.deep_volume(width)?;
        self.tape.push(v);
        Ok(v)
    }
}

/// Replays recorded values in order, checking them against the requested bounds.
pub struct TapeMarks<'a> {
    tape: &'a [i64],
    pos: usize,
}

impl<'a> TapeMarks<'a> {
    pub fn new(tape: &'a [i64]) -> Self {
        TapeMarks { tape, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    fn next(&mut self) -> Result<i64> {
        let v = *self
            .tape
            .get(self.pos)
            .ok_or_else(|| DynamicsError::Tape(format!("tape exhausted after {} values", self.pos)))?;
        self.pos += 1;
        Ok(v)
    }
}

impl MarkSource for TapeMarks<'_> {
    fn bounded(&mut self, mark: Mark, lo: i64, hi: i64) -> Result<i64> {
        let v = self.next()?;
        if v < lo || v > hi {
            return Err(DynamicsError::Tape(format!("{mark:?} value {v} outside [{lo}, {hi}]")));
        }
        Ok(v)
    }

    fn deep_volume(&mut self, width: i64) -> Result<i64> {
        let v = self.next()?;
        if v < width {
            return Err(DynamicsError::Tape(format!("deep volume {v} below width {width}")));
        }
        Ok(v)
    }
}
