//! Event handlers of the meta-queue book. Each handler mutates the state of
//! one side, then the depth constraint is restored on both sides.

use mqh_core::{round_ratio, EventRecord, EventType, LobState, MetaQueue, OrderKind, Side};
use serde::{Deserialize, Serialize};

use crate::error::{DynamicsError, Result};
use crate::marks::{Mark, MarkSource};

/// Upper bound on top depletions inside one market order.
pub const MAX_WATERFALL_DEPLETIONS: u32 = 100_000;

/// Shares entering and leaving the modelled book during one event.
///
/// `total_after - total_before = added - removed - purged + replenished`
/// holds exactly for every event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeLedger {
    /// Limit order sizes.
    pub added: i64,
    /// Realized cancel and market order sizes.
    pub removed: i64,
    /// Shares dropped by depth purges and top truncations.
    pub purged: i64,
    /// Shares drawn from the unmodelled part of the book.
    pub replenished: i64,
    pub purges: u32,
    pub truncations: u32,
    /// Depletions blocked by the maximal spread, top refilled in place.
    pub boundary_refills: u32,
    pub deep_refills: u32,
}

impl VolumeLedger {
    pub fn net(&self) -> i64 {
        self.added - self.removed - self.purged + self.replenished
    }

    pub fn accumulate(&mut self, other: &VolumeLedger) {
        self.added += other.added;
        self.removed += other.removed;
        self.purged += other.purged;
        self.replenished += other.replenished;
        self.purges += other.purges;
        self.truncations += other.truncations;
        self.boundary_refills += other.boundary_refills;
        self.deep_refills += other.deep_refills;
    }
}

/// Outcome of one handler call besides the state change.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Effect {
    pub size: i64,
    /// Distance in ticks from the same-side best before the event: the price
    /// improvement for in-spread orders, the depth behind the best otherwise.
    /// Deep events sit at the first deep level.
    pub offset_ticks: i64,
    pub depleted_levels: u32,
    pub ledger: VolumeLedger,
}

/// Ξ(q, a, b): shares purged when `purged_levels` of `total_levels` go.
pub fn xi_uniform(q: i64, purged_levels: i64, total_levels: i64) -> i64 {
    debug_assert!(total_levels >= 1 && (0..=total_levels).contains(&purged_levels));
    if purged_levels >= total_levels {
        return q;
    }
    if q <= 0 || purged_levels <= 0 {
        return 0;
    }
    round_ratio(q * purged_levels, total_levels).min(q - 1)
}

/// Volume taken by a new top of `new_top_levels` out of a deep meta-queue of
/// `old_deep_levels` holding `q_deep` shares.
pub fn partition_uniform(q_deep: i64, new_top_levels: i64, old_deep_levels: i64) -> i64 {
    debug_assert!(q_deep >= 1 && 1 <= new_top_levels && new_top_levels <= old_deep_levels);
    if new_top_levels >= old_deep_levels {
        return q_deep;
    }
    round_ratio(q_deep * new_top_levels, old_deep_levels).min(q_deep - 1).max(1)
}

/// Largest deep width allowed on a side with top width `m_top` at spread `s`.
pub fn max_deep_width(m_half_depth: i64, spread: i64, m_top: i64) -> i64 {
    (2 * m_half_depth + 2 - spread - 2 * m_top).div_euclid(2)
}

fn total_shares(state: &LobState) -> i64 {
    state.bid.total_volume() + state.ask.total_volume()
}

/// Restores the depth constraint on `side` by purging deep levels, or, when
/// even a single deep level does not fit, by truncating the top.
pub fn enforce_depth<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    marks: &mut M,
    ledger: &mut VolumeLedger,
) -> Result<()> {
    let m = state.m_half_depth;
    let s = state.spread_ticks();
    let st = *state.side(side);
    let allowed = max_deep_width(m, s, st.m_top);
    if st.m_deep <= allowed {
        return Ok(());
    }
    if allowed >= 1 {
        let purged = xi_uniform(st.q_deep, st.m_deep - allowed, st.m_deep);
        let sm = state.side_mut(side);
        sm.m_deep = allowed;
        sm.q_deep -= purged;
        ledger.purged += purged;
        ledger.purges += 1;
        return Ok(());
    }
    let new_top = (2 * m - s).div_euclid(2);
    if new_top < 1 {
        return Err(DynamicsError::Precondition(format!("spread {s} leaves no room for a top level at M = {m}")));
    }
    let cut = xi_uniform(st.q_top, st.m_top - new_top, st.m_top);
    let refill = marks.deep_volume(1)?;
    let sm = state.side_mut(side);
    sm.m_top = new_top;
    sm.q_top -= cut;
    ledger.purged += cut + sm.q_deep;
    sm.m_deep = 1;
    sm.q_deep = refill;
    ledger.replenished += refill;
    ledger.truncations += 1;
    Ok(())
}

fn enforce_both<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    marks: &mut M,
    ledger: &mut VolumeLedger,
) -> Result<()> {
    enforce_depth(state, side, marks, ledger)?;
    enforce_depth(state, side.opposite(), marks, ledger)
}

/// Replaces an exhausted deep meta-queue by the widest one the constraint
/// allows, filled from the unmodelled part of the book.
fn replenish_deep<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    marks: &mut M,
    ledger: &mut VolumeLedger,
) -> Result<()> {
    let s = state.spread_ticks();
    let width = max_deep_width(state.m_half_depth, s, state.side(side).m_top).max(1);
    let q = marks.deep_volume(width)?;
    let sm = state.side_mut(side);
    sm.m_deep = width;
    sm.q_deep = q;
    ledger.replenished += q;
    ledger.deep_refills += 1;
    Ok(())
}

/// Moves the book after the top meta-queue of `side` has been emptied.
/// Depth constraints are not restored here.
fn deplete_top<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    marks: &mut M,
    ledger: &mut VolumeLedger,
) -> Result<()> {
    let m = state.m_half_depth;
    let s = state.spread_ticks();
    let old = *state.side(side);
    if s + old.m_top > 2 * m - 2 {
        // the spread cannot widen further; the top is refilled where it is
        let q = marks.deep_volume(1)?;
        state.side_mut(side).q_top = q;
        ledger.replenished += q;
        ledger.boundary_refills += 1;
        return Ok(());
    }
    let new_best = old.best_price.offset_ticks(side.away() * old.m_top);
    let (m_top, q_top) = if old.q_deep < 2 {
        (old.m_deep, old.q_deep)
    } else {
        let w = marks.bounded(Mark::EtaNewTop, 1, old.m_deep)?;
        (w, partition_uniform(old.q_deep, w, old.m_deep))
    };
    {
        let sm = state.side_mut(side);
        sm.best_price = new_best;
        sm.m_top = m_top;
        sm.q_top = q_top;
        sm.m_deep = old.m_deep - m_top;
        sm.q_deep = old.q_deep - q_top;
    }
    if m_top == old.m_deep {
        replenish_deep(state, side, marks, ledger)?;
    }
    Ok(())
}

fn require_size(kappa: i64) -> Result<()> {
    if kappa < 1 {
        return Err(DynamicsError::Precondition(format!("order size must be >= 1, got {kappa}")));
    }
    Ok(())
}

/// Limit order placed `eta` ticks inside the spread on `side`.
pub fn apply_is_limit_order<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    eta: i64,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    let s = state.spread_ticks();
    if s < 2 {
        return Err(DynamicsError::Precondition(format!("in-spread order at spread {s}")));
    }
    if !(1..s).contains(&eta) {
        return Err(DynamicsError::Precondition(format!("in-spread offset {eta} outside [1, {}]", s - 1)));
    }
    require_size(kappa)?;
    let mut ledger = VolumeLedger { added: kappa, ..Default::default() };
    let sm = state.side_mut(side);
    sm.best_price = sm.best_price.offset_ticks(-side.away() * eta);
    sm.m_deep += sm.m_top;
    sm.q_deep += sm.q_top;
    sm.m_top = eta;
    sm.q_top = kappa;
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size: kappa, offset_ticks: eta, depleted_levels: 0, ledger })
}

/// Limit order `eta` ticks behind the best on `side`, inside the top meta-queue.
pub fn apply_top_limit_order<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    eta: i64,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    let m_top = state.side(side).m_top;
    if !(0..m_top).contains(&eta) {
        return Err(DynamicsError::Precondition(format!("top offset {eta} outside [0, {}]", m_top - 1)));
    }
    require_size(kappa)?;
    let mut ledger = VolumeLedger { added: kappa, ..Default::default() };
    let sm = state.side_mut(side);
    if eta == 0 {
        sm.q_top += kappa;
    } else {
        sm.m_deep += sm.m_top - eta;
        sm.m_top = eta;
        sm.q_deep += kappa;
    }
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size: kappa, offset_ticks: eta, depleted_levels: 0, ledger })
}

/// Cancellation of `kappa` shares from the top meta-queue of `side`. The
/// realized size is capped at the queue volume.
pub fn apply_top_cancel<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    require_size(kappa)?;
    let size = kappa.min(state.side(side).q_top);
    let mut ledger = VolumeLedger { removed: size, ..Default::default() };
    let sm = state.side_mut(side);
    sm.q_top -= size;
    let mut depleted = 0;
    if sm.q_top <= 0 {
        deplete_top(state, side, marks, &mut ledger)?;
        depleted = 1;
    }
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size, offset_ticks: 0, depleted_levels: depleted, ledger })
}

/// Market order of `kappa` shares hitting the top of `side`, walking through
/// successive tops until filled.
pub fn apply_market_order<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    require_size(kappa)?;
    let mut ledger = VolumeLedger { removed: kappa, ..Default::default() };
    let mut remaining = kappa;
    let mut depleted = 0u32;
    loop {
        let sm = state.side_mut(side);
        let take = remaining.min(sm.q_top);
        sm.q_top -= take;
        remaining -= take;
        if sm.q_top > 0 {
            break;
        }
        if depleted >= MAX_WATERFALL_DEPLETIONS {
            return Err(DynamicsError::LiquidityExhaustion {
                time: state.sim_time,
                detail: format!(
                    "market order of {kappa} on {side:?} still has {remaining} unfilled after {depleted} depletions"
                ),
            });
        }
        deplete_top(state, side, marks, &mut ledger)?;
        depleted += 1;
        // the opposite side must stay within depth while the spread widens
        enforce_depth(state, side.opposite(), marks, &mut ledger)?;
        if remaining == 0 {
            break;
        }
    }
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size: kappa, offset_ticks: 0, depleted_levels: depleted, ledger })
}

/// Limit order added to the deep meta-queue of `side`.
pub fn apply_deep_limit_order<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    require_size(kappa)?;
    let mut ledger = VolumeLedger { added: kappa, ..Default::default() };
    let offset = state.side(side).m_top;
    state.side_mut(side).q_deep += kappa;
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size: kappa, offset_ticks: offset, depleted_levels: 0, ledger })
}

/// Cancellation from the deep meta-queue of `side`. An emptied deep queue is
/// absorbed into the top and a new one is drawn from the unmodelled book.
pub fn apply_deep_cancel<M: MarkSource + ?Sized>(
    state: &mut LobState,
    side: Side,
    kappa: i64,
    marks: &mut M,
) -> Result<Effect> {
    require_size(kappa)?;
    let size = kappa.min(state.side(side).q_deep);
    let mut ledger = VolumeLedger { removed: size, ..Default::default() };
    let sm = state.side_mut(side);
    let offset = sm.m_top;
    sm.q_deep -= size;
    let mut depleted = 0;
    if sm.q_deep <= 0 {
        sm.m_top += sm.m_deep;
        replenish_deep(state, side, marks, &mut ledger)?;
        depleted = 1;
    }
    enforce_both(state, side, marks, &mut ledger)?;
    Ok(Effect { size, offset_ticks: offset, depleted_levels: depleted, ledger })
}

/// Draws the marks of `event` from `marks` and applies the matching handler.
pub fn apply_marked_event<M: MarkSource + ?Sized>(
    state: &mut LobState,
    event: EventType,
    marks: &mut M,
) -> Result<Effect> {
    let side = event.side();
    match (event.kind(), event.queue()) {
        (OrderKind::Limit, MetaQueue::InSpread) => {
            let s = state.spread_ticks();
            if s < 2 {
                return Err(DynamicsError::Precondition(format!("{event} at spread {s}")));
            }
            let eta = marks.bounded(Mark::EtaInSpread, 1, s - 1)?;
            let kappa = marks.draw(Mark::KappaInSpread)?;
            apply_is_limit_order(state, side, eta, kappa, marks)
        }
        (OrderKind::Limit, MetaQueue::Top) => {
            let eta = marks.bounded(Mark::EtaTop, 0, state.side(side).m_top - 1)?;
            let kappa = marks.draw(Mark::KappaTop)?;
            apply_top_limit_order(state, side, eta, kappa, marks)
        }
        (OrderKind::Cancel, MetaQueue::Top) => {
            let kappa = marks.draw(Mark::KappaTop)?;
            apply_top_cancel(state, side, kappa, marks)
        }
        (OrderKind::Market, _) => {
            let kappa = marks.draw(Mark::KappaMarket)?;
            apply_market_order(state, side, kappa, marks)
        }
        (OrderKind::Limit, MetaQueue::Deep) => {
            let kappa = marks.draw(Mark::KappaDeep)?;
            apply_deep_limit_order(state, side, kappa, marks)
        }
        (OrderKind::Cancel, MetaQueue::Deep) => {
            let kappa = marks.draw(Mark::KappaDeep)?;
            apply_deep_cancel(state, side, kappa, marks)
        }
        (kind, queue) => Err(DynamicsError::Precondition(format!("no handler for {kind:?} on {queue:?}"))),
    }
}

/// Applies `event` at `time`, returning its record and volume ledger.
pub fn apply_event<M: MarkSource + ?Sized>(
    state: &mut LobState,
    event: EventType,
    time: f64,
    marks: &mut M,
) -> Result<(EventRecord, VolumeLedger)> {
    let spread_before = state.spread_ticks();
    let mid_before = mqh_core::mid_price(state)?;
    let total_before = total_shares(state);
    state.sim_time = time;
    let effect = apply_marked_event(state, event, marks)?;
    debug_assert_eq!(total_shares(state) - total_before, effect.ledger.net(), "{event} ledger out of balance");
    let record = EventRecord {
        time,
        event_type: event,
        size: effect.size,
        offset_ticks: effect.offset_ticks,
        depleted_levels: effect.depleted_levels,
        mid_before,
        spread_before,
        bid: state.bid,
        ask: state.ask,
    };
    Ok((record, effect.ledger))
}
