//! Coupled loop: the Hawkes stream picks event times and types from the live
//! spread, the handlers move the book.

use mqh_core::{check_constraints, sample_bounded, EventRecord, GeomWithSpikes, LobState, SideState, TickPrice};
use mqh_hawkes::{kernel_norm_matrix, HawkesSimulator, Spec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{HandlerConfig, InitConfig, RunSettings};
use crate::error::{DynamicsError, Result};
use crate::handlers::{apply_event, max_deep_width, VolumeLedger};
use crate::marks::{Mark, MarkSource, SampledMarks};

/// Full book at a point in the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Number of events applied before the snapshot.
    pub event_index: u64,
    pub state: LobState,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub events: u64,
    pub counts: [u64; 12],
    pub candidates: u64,
    pub ledger: VolumeLedger,
    /// Time-weighted mean spread in ticks over [0, horizon].
    pub mean_spread: f64,
    pub max_spread: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub initial: LobState,
    pub records: Vec<EventRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: LobState,
    pub stats: RunStats,
}

/// Initial book: bid best at the anchor, ask `s0` ticks above, widths drawn
/// from geometric laws conditioned on the depth constraint.
pub fn initial_state<M: MarkSource + ?Sized>(
    init: &InitConfig,
    m_half_depth: i64,
    rng: &mut ChaCha8Rng,
    marks: &mut M,
) -> Result<LobState> {
    init.validate(m_half_depth)?;
    let top = GeomWithSpikes::geometric(init.m0_top)?;
    let deep = GeomWithSpikes::geometric(init.m0_deep)?;
    let s = init.s0;
    let mut side = |best: TickPrice, rng: &mut ChaCha8Rng| -> Result<SideState> {
        let m_top = sample_bounded(&top, 1, (2 * m_half_depth - s).div_euclid(2), rng)?;
        let m_deep = sample_bounded(&deep, 1, max_deep_width(m_half_depth, s, m_top), rng)?;
        let q_top = marks.draw(Mark::KappaTop)?;
        let q_deep = marks.deep_volume(m_deep)?;
        Ok(SideState { best_price: best, q_top, m_top, q_deep, m_deep })
    };
    let bid = side(TickPrice::from_ticks(init.anchor_ticks), rng)?;
    let ask = side(TickPrice::from_ticks(init.anchor_ticks + s), rng)?;
    let state = LobState { bid, ask, m_half_depth, sim_time: 0.0 };
    let v = check_constraints(&state);
    if !v.is_empty() {
        return Err(DynamicsError::Config(format!("initial book violates constraints: {v:?}")));
    }
    Ok(state)
}

/// Step-by-step driver. Each call to [`Simulation::step`] applies one event.
pub struct Simulation {
    hawkes: HawkesSimulator<f64>,
    handlers: HandlerConfig,
    settings: RunSettings,
    state: LobState,
    rng: ChaCha8Rng,
    stats: RunStats,
    spread_area: f64,
    last_time: f64,
    done: bool,
}

impl Simulation {
    pub fn new(spec: &Spec, handlers: &HandlerConfig, init: &InitConfig, settings: &RunSettings) -> Result<Self> {
        settings.validate()?;
        handlers.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        // widths and volumes use separate streams so that the event stream
        // does not depend on how many rejection draws the widths needed
        let mut init_rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x5EED_1A17);
        let state = {
            let mut marks = SampledMarks::new(handlers, &mut rng);
            initial_state(init, settings.m_half_depth, &mut init_rng, &mut marks)?
        };
        if let Ok(r) = kernel_norm_matrix(spec, Some(init.s0)) {
            if !r.stable {
                log::warn!("kernel norm matrix has spectral radius {:.3} >= 1", r.spectral_radius);
            }
        }
        let hawkes = HawkesSimulator::new(spec.clone())?;
        let stats = RunStats { max_spread: state.spread_ticks(), ..Default::default() };
        Ok(Simulation {
            hawkes,
            handlers: handlers.clone(),
            settings: settings.clone(),
            state,
            rng,
            stats,
            spread_area: 0.0,
            last_time: 0.0,
            done: false,
        })
    }

    pub fn state(&self) -> &LobState {
        &self.state
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Applies the next event, or returns `None` once the horizon is reached.
    pub fn step(&mut self) -> Result<Option<EventRecord>> {
        if self.done {
            return Ok(None);
        }
        let spread = self.state.spread_ticks();
        let next = self.hawkes.next_event(spread, self.settings.horizon, &mut self.rng)?;
        let Some((t, event)) = next else {
            self.spread_area += spread as f64 * (self.settings.horizon - self.last_time);
            self.last_time = self.settings.horizon;
            self.state.sim_time = self.settings.horizon;
            self.stats.mean_spread = self.spread_area / self.settings.horizon;
            self.stats.candidates = self.hawkes.candidates();
            self.done = true;
            return Ok(None);
        };
        self.spread_area += spread as f64 * (t - self.last_time);
        self.last_time = t;
        let mut marks = SampledMarks::new(&self.handlers, &mut self.rng);
        let (record, ledger) = apply_event(&mut self.state, event, t, &mut marks)?;
        let violations = check_constraints(&self.state);
        if !violations.is_empty() {
            return Err(DynamicsError::Invariant { time: t, event, violations });
        }
        self.stats.events += 1;
        self.stats.counts[event.index()] += 1;
        self.stats.ledger.accumulate(&ledger);
        self.stats.max_spread = self.stats.max_spread.max(self.state.spread_ticks());
        Ok(Some(record))
    }

    /// Runs to the horizon, handing each record to `sink`. Snapshots are
    /// passed to `on_snapshot` every `snapshot_every` events.
    pub fn run_with<F, G>(&mut self, mut sink: F, mut on_snapshot: G) -> Result<()>
    where
        F: FnMut(&EventRecord),
        G: FnMut(Snapshot),
    {
        on_snapshot(Snapshot { event_index: 0, state: self.state });
        while let Some(rec) = self.step()? {
            sink(&rec);
            if self.stats.events % self.settings.snapshot_every as u64 == 0 {
                on_snapshot(Snapshot { event_index: self.stats.events, state: self.state });
            }
        }
        Ok(())
    }
}

/// Runs one simulation and keeps the whole event log in memory.
pub fn run_simulation(
    spec: &Spec,
    handlers: &HandlerConfig,
    init: &InitConfig,
    settings: &RunSettings,
) -> Result<SimulationOutput> {
    let mut sim = Simulation::new(spec, handlers, init, settings)?;
    let initial = *sim.state();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    sim.run_with(|r| records.push(*r), |s| snapshots.push(s))?;
    Ok(SimulationOutput { initial, records, snapshots, final_state: *sim.state(), stats: sim.stats().clone() })
}
