//! Maps LOBSTER messages onto the 12 meta-queue event types.
//!
//! Each message is classified against the book before it (the previous
//! orderbook row). The top meta-queue of a side is its best level plus the
//! empty ticks up to the second occupied level; the deep meta-queue holds the
//! remaining levels within `m_half_depth` ticks of the mid. Orders beyond
//! that window are dropped and counted.

use std::path::Path;

use mqh_analytics::{BookView, EventLog};
use mqh_core::{EventRecord, EventType, LobState, Side, SideState, TickPrice};
use serde::{Deserialize, Serialize};

use crate::error::{IoError, Result};
use crate::lobster::{BookSnapshotRow, Direction, LobsterKind, LobsterReader, RawLobsterEvent, PRICE_SCALE};

/// Regular trading hours in seconds after midnight.
pub const DEFAULT_SESSION: (f64, f64) = (34_200.0, 57_600.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub tick_size: f64,
    pub m_half_depth: i64,
    /// Messages outside [open, close) are ignored.
    pub session: Option<(f64, f64)>,
    /// Merge consecutive executions with equal time and direction into one MO.
    pub aggregate_executions: bool,
}

impl ClassifyOptions {
    pub fn new(tick_size: f64, m_half_depth: i64) -> Self {
        ClassifyOptions { tick_size, m_half_depth, session: Some(DEFAULT_SESSION), aggregate_executions: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyCounters {
    pub messages: u64,
    pub events: u64,
    /// Orders more than `m_half_depth` ticks from the mid.
    pub dropped_beyond_depth: u64,
    /// Messages whose pre-event or post-event book lacks a side, or that
    /// cannot be placed (e.g. a submission through the opposite best).
    pub unresolved: u64,
    pub hidden_executions: u64,
    pub crosses: u64,
    pub halts: u64,
    pub outside_session: u64,
    pub merged_executions: u64,
}

impl ClassifyCounters {
    /// Share of visible order-flow messages dropped for depth or unresolved.
    pub fn dropped_fraction(&self) -> f64 {
        let visible = self.events + self.merged_executions + self.dropped_beyond_depth + self.unresolved;
        if visible == 0 {
            0.0
        } else {
            (self.dropped_beyond_depth + self.unresolved) as f64 / visible as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct LobsterDataset {
    pub log: EventLog,
    /// Level-resolved books with the time each was in force.
    pub books: Vec<(BookView, f64)>,
    pub counters: ClassifyCounters,
}

struct Ctx {
    tick_units: i64,
    m_half_depth: i64,
}

impl Ctx {
    fn ticks(&self, units: i64) -> i64 {
        units / self.tick_units
    }

    /// Meta-queue summary of one side, or None if the side is empty.
    fn side_state(&self, row: &BookSnapshotRow, side: Side) -> Option<SideState> {
        let (a, b) = (row.asks.first()?.0, row.bids.first()?.0);
        let levels = match side {
            Side::Ask => &row.asks,
            Side::Bid => &row.bids,
        };
        let reach = 2 * self.m_half_depth * self.tick_units;
        let within: Vec<(i64, i64)> = levels.iter().copied().filter(|&(p, _)| (2 * p - a - b).abs() <= reach).collect();
        let (best, q_top) = levels[0];
        let mut st = SideState { best_price: TickPrice::from_ticks(self.ticks(best)), q_top, m_top: 1, q_deep: 0, m_deep: 0 };
        if within.len() >= 2 && within[0].0 == best {
            let second = within[1].0;
            let last = within[within.len() - 1].0;
            st.m_top = self.ticks((second - best).abs());
            st.q_deep = within[1..].iter().map(|l| l.1).sum();
            st.m_deep = self.ticks((last - second).abs()) + 1;
        }
        Some(st)
    }

    fn state(&self, row: &BookSnapshotRow) -> Option<(SideState, SideState)> {
        Some((self.side_state(row, Side::Bid)?, self.side_state(row, Side::Ask)?))
    }

    fn view(&self, row: &BookSnapshotRow) -> BookView {
        let conv = |v: &[(i64, i64)]| v.iter().map(|&(p, s)| (TickPrice::from_ticks(self.ticks(p)), s)).collect();
        BookView { bid: conv(&row.bids), ask: conv(&row.asks) }
    }
}

enum Outcome {
    Event(EventType, i64),
    Dropped,
    Unresolved,
}

fn side_of(direction: Direction) -> Side {
    match direction {
        Direction::Buy => Side::Bid,
        Direction::Sell => Side::Ask,
    }
}

/// Classifies one limit-order message against the pre-event book.
fn classify_order(ctx: &Ctx, ev: &RawLobsterEvent, pre: &BookSnapshotRow) -> Outcome {
    let (Some(&(a, _)), Some(&(b, _))) = (pre.asks.first(), pre.bids.first()) else {
        return Outcome::Unresolved;
    };
    let side = side_of(ev.direction);
    if (2 * ev.price - a - b).abs() > 2 * ctx.m_half_depth * ctx.tick_units {
        return Outcome::Dropped;
    }
    let Some(st) = ctx.side_state(pre, side) else {
        return Outcome::Unresolved;
    };
    let best = match side {
        Side::Ask => a,
        Side::Bid => b,
    };
    // depth behind the best, negative inside the spread
    let depth = ctx.ticks(match side {
        Side::Ask => ev.price - best,
        Side::Bid => best - ev.price,
    });
    let submission = ev.kind == LobsterKind::Submission;
    let in_spread = ev.price > b && ev.price < a;
    let ty = if depth < 0 {
        if !(submission && in_spread) {
            return Outcome::Unresolved;
        }
        return Outcome::Event(if side == Side::Ask { EventType::LoAskInSpread } else { EventType::LoBidInSpread }, -depth);
    } else if depth < st.m_top {
        match (side, submission) {
            (Side::Ask, true) => EventType::LoAskTop,
            (Side::Ask, false) => EventType::CoAskTop,
            (Side::Bid, true) => EventType::LoBidTop,
            (Side::Bid, false) => EventType::CoBidTop,
        }
    } else {
        match (side, submission) {
            (Side::Ask, true) => EventType::LoAskDeep,
            (Side::Ask, false) => EventType::CoAskDeep,
            (Side::Bid, true) => EventType::LoBidDeep,
            (Side::Bid, false) => EventType::CoBidDeep,
        }
    };
    Outcome::Event(ty, depth)
}

/// Levels at or better than `price` on `side` that vanished between two books.
fn depleted_levels(pre: &BookSnapshotRow, post: &BookSnapshotRow, side: Side) -> u32 {
    let (before, after) = match side {
        Side::Ask => (&pre.asks, &post.asks),
        Side::Bid => (&pre.bids, &post.bids),
    };
    let new_best = after.first().map(|l| l.0);
    before
        .iter()
        .take_while(|l| match (side, new_best) {
            (_, None) => true,
            (Side::Ask, Some(nb)) => l.0 < nb,
            (Side::Bid, Some(nb)) => l.0 > nb,
        })
        .count() as u32
}

struct Pending {
    time: f64,
    direction: Direction,
    size: i64,
    pre: BookSnapshotRow,
    post: BookSnapshotRow,
}

struct Builder {
    ctx: Ctx,
    records: Vec<EventRecord>,
    counters: ClassifyCounters,
}

impl Builder {
    fn push(&mut self, time: f64, ty: EventType, size: i64, offset: i64, depleted: u32, pre: &BookSnapshotRow, post: &BookSnapshotRow) {
        let (Some((pb, pa)), Some((bid, ask))) = (self.ctx.state(pre), self.ctx.state(post)) else {
            self.counters.unresolved += 1;
            return;
        };
        let (bh, ah) = (pb.best_price.half_ticks(), pa.best_price.half_ticks());
        self.records.push(EventRecord {
            time,
            event_type: ty,
            size,
            offset_ticks: offset,
            depleted_levels: depleted,
            mid_before: TickPrice::from_half_ticks((bh + ah) / 2),
            spread_before: (ah - bh).div_euclid(2),
            bid,
            ask,
        });
        self.counters.events += 1;
    }

    fn flush(&mut self, pending: Option<Pending>) {
        if let Some(p) = pending {
            // a sell order executed means a buyer hit the ask
            let (ty, side) = match p.direction {
                Direction::Sell => (EventType::MoAsk, Side::Ask),
                Direction::Buy => (EventType::MoBid, Side::Bid),
            };
            let depleted = depleted_levels(&p.pre, &p.post, side);
            self.push(p.time, ty, p.size, 0, depleted, &p.pre, &p.post);
        }
    }
}

/// Reads and classifies a LOBSTER message/orderbook pair.
pub fn classify_lobster(message_file: &Path, orderbook_file: &Path, opts: &ClassifyOptions) -> Result<LobsterDataset> {
    let reader = LobsterReader::open(message_file, orderbook_file, opts.tick_size)?;
    classify_stream(reader, opts)
}

/// Classifies an aligned stream of (message, post-event book) rows.
pub fn classify_stream<I>(rows: I, opts: &ClassifyOptions) -> Result<LobsterDataset>
where
    I: IntoIterator<Item = Result<(RawLobsterEvent, BookSnapshotRow)>>,
{
    if opts.m_half_depth < 1 {
        return Err(IoError::Invalid(format!("m_half_depth must be >= 1, got {}", opts.m_half_depth)));
    }
    let tick_units = (opts.tick_size * PRICE_SCALE).round() as i64;
    if tick_units < 1 {
        return Err(IoError::Invalid(format!("tick size {} is below 1e-4", opts.tick_size)));
    }
    let mut bld = Builder {
        ctx: Ctx { tick_units, m_half_depth: opts.m_half_depth },
        records: Vec::new(),
        counters: ClassifyCounters::default(),
    };
    let mut pre: Option<BookSnapshotRow> = None;
    let mut initial: Option<(f64, SideState, SideState)> = None;
    let mut pending: Option<Pending> = None;
    let mut books: Vec<(BookView, f64)> = Vec::new();
    let mut last_book: Option<(BookView, f64)> = None;
    let mut last_time = f64::NAN;

    for row in rows {
        let (ev, post) = row?;
        bld.counters.messages += 1;
        if let Some((open, close)) = opts.session {
            if ev.time < open || ev.time >= close {
                bld.counters.outside_session += 1;
                continue;
            }
        }
        last_time = ev.time;
        if let Some((view, since)) = last_book.take() {
            if ev.time > since {
                books.push((view, ev.time - since));
            }
        }
        last_book = Some((bld.ctx.view(&post), ev.time));

        // the first in-session row only establishes the book
        let Some(before) = pre.replace(post.clone()) else {
            match bld.ctx.state(&post) {
                Some((b, a)) => initial = Some((ev.time, b, a)),
                None => {
                    pre = None;
                    bld.counters.unresolved += 1;
                }
            }
            continue;
        };

        if ev.kind == LobsterKind::VisibleExecution && opts.aggregate_executions {
            if let Some(p) = pending.as_mut() {
                if p.time == ev.time && p.direction == ev.direction {
                    p.size += ev.size;
                    p.post = post;
                    bld.counters.merged_executions += 1;
                    continue;
                }
            }
        }
        bld.flush(pending.take());

        match ev.kind {
            LobsterKind::Submission | LobsterKind::Cancellation | LobsterKind::Deletion => {
                match classify_order(&bld.ctx, &ev, &before) {
                    Outcome::Event(ty, offset) => bld.push(ev.time, ty, ev.size, offset, 0, &before, &post),
                    Outcome::Dropped => bld.counters.dropped_beyond_depth += 1,
                    Outcome::Unresolved => bld.counters.unresolved += 1,
                }
            }
            LobsterKind::VisibleExecution => {
                pending = Some(Pending { time: ev.time, direction: ev.direction, size: ev.size, pre: before, post });
                if !opts.aggregate_executions {
                    bld.flush(pending.take());
                }
            }
            LobsterKind::HiddenExecution => bld.counters.hidden_executions += 1,
            LobsterKind::Cross => bld.counters.crosses += 1,
            LobsterKind::Halt => bld.counters.halts += 1,
        }
    }
    bld.flush(pending.take());

    let Some((start, bid0, ask0)) = initial else {
        return Err(IoError::Invalid("no usable book in the input".into()));
    };
    let mut end = last_time;
    if !(end > start) {
        end = start + f64::EPSILON.max(start.abs() * f64::EPSILON);
    }
    if let Some((view, since)) = last_book {
        if end > since {
            books.push((view, end - since));
        }
    }
    let log = EventLog {
        start,
        end,
        tick_size: opts.tick_size,
        m_half_depth: opts.m_half_depth,
        initial: LobState { bid: bid0, ask: ask0, m_half_depth: opts.m_half_depth, sim_time: start },
        records: bld.records,
    };
    Ok(LobsterDataset { log, books, counters: bld.counters })
}
