//! Meta-queue book state and integer price arithmetic.
//!
//! Prices are stored in half ticks so that mid prices are exact integers. A
//! quoted level always sits on a whole tick (even half-tick count).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Default absolute price of the best bid at simulation start, in ticks.
pub const DEFAULT_ANCHOR_TICKS: i64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bid, Side::Ask];

    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    /// Direction in which prices move away from the mid on this side.
    pub fn away(self) -> i64 {
        match self {
            Side::Bid => -1,
            Side::Ask => 1,
        }
    }
}

/// Price in half-tick units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TickPrice(i64);

impl TickPrice {
    pub const fn from_half_ticks(h: i64) -> Self {
        TickPrice(h)
    }

    pub const fn from_ticks(t: i64) -> Self {
        TickPrice(2 * t)
    }

    pub const fn half_ticks(self) -> i64 {
        self.0
    }

    /// True when the price sits on a whole tick.
    pub const fn is_on_tick(self) -> bool {
        self.0 % 2 == 0
    }

    /// Whole ticks; only meaningful for quoted levels.
    pub const fn ticks(self) -> i64 {
        self.0.div_euclid(2)
    }

    pub fn as_ticks_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn offset_ticks(self, ticks: i64) -> Self {
        TickPrice(self.0 + 2 * ticks)
    }

    pub fn to_currency(self, tick: TickSize) -> f64 {
        self.as_ticks_f64() * tick.value()
    }
}

impl fmt::Display for TickPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0.div_euclid(2))
        }
    }
}

/// Currency value of one tick (δ).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TickSize(f64);

impl TickSize {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(TickSize(value))
        } else {
            Err(CoreError::Domain(format!("tick size must be positive, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TickSize {
    type Error = CoreError;
    fn try_from(v: f64) -> Result<Self> {
        TickSize::new(v)
    }
}

impl From<TickSize> for f64 {
    fn from(t: TickSize) -> f64 {
        t.0
    }
}

impl Default for TickSize {
    fn default() -> Self {
        TickSize(0.01)
    }
}

/// One side of the book: top meta-queue and deep meta-queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideState {
    pub best_price: TickPrice,
    pub q_top: i64,
    pub m_top: i64,
    pub q_deep: i64,
    pub m_deep: i64,
}

impl SideState {
    pub fn total_volume(&self) -> i64 {
        self.q_top + self.q_deep
    }

    /// Price of the first level of the deep meta-queue.
    pub fn deep_price(&self, side: Side) -> TickPrice {
        self.best_price.offset_ticks(side.away() * self.m_top)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LobState {
    pub bid: SideState,
    pub ask: SideState,
    pub m_half_depth: i64,
    pub sim_time: f64,
}

impl LobState {
    pub fn side(&self, side: Side) -> &SideState {
        match side {
            Side::Bid => &self.bid,
            Side::Ask => &self.ask,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut SideState {
        match side {
            Side::Bid => &mut self.bid,
            Side::Ask => &mut self.ask,
        }
    }

    /// s(t) in ticks. Negative or zero means a crossed or locked book.
    pub fn spread_ticks(&self) -> i64 {
        (self.ask.best_price.half_ticks() - self.bid.best_price.half_ticks()).div_euclid(2)
    }

    /// Depth of the deepest modelled level on `side`, in half ticks from the mid.
    pub fn deepest_half_ticks(&self, side: Side) -> i64 {
        let s = self.side(side);
        self.spread_ticks() + 2 * (s.m_top + s.m_deep - 1)
    }

    /// Reflects the book through the mid price: bid and ask swap roles.
    pub fn mirrored(&self) -> LobState {
        let centre = self.bid.best_price.half_ticks() + self.ask.best_price.half_ticks();
        let reflect = |s: &SideState| SideState {
            best_price: TickPrice::from_half_ticks(centre - s.best_price.half_ticks()),
            ..*s
        };
        LobState {
            bid: reflect(&self.ask),
            ask: reflect(&self.bid),
            ..*self
        }
    }
}

pub fn mid_price(state: &LobState) -> Result<TickPrice> {
    let b = state.bid.best_price.half_ticks();
    let a = state.ask.best_price.half_ticks();
    if a <= b {
        return Err(CoreError::CrossedBook { bid_half_ticks: b, ask_half_ticks: a });
    }
    // (2·bid_ticks + 2·ask_ticks) / 2 in half ticks
    Ok(TickPrice::from_half_ticks((a + b) / 2))
}

/// ε = δ / ⟨P_mid⟩ in basis points.
pub fn relative_tick_size(tick_size: f64, avg_mid_price: f64) -> Result<f64> {
    if !(tick_size > 0.0) || !(avg_mid_price > 0.0) {
        return Err(CoreError::Domain(format!(
            "relative tick size needs positive inputs, got tick {tick_size}, mid {avg_mid_price}"
        )));
    }
    Ok(tick_size / avg_mid_price * 1e4)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Deepest modelled level lies beyond M_{1/2} ticks from the mid.
    DepthOverflow,
    MinDeepWidth,
    MinTopWidth,
    EmptyTopQueue,
    EmptyDeepQueue,
    OffTickQuote,
    CrossedBook,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub side: Option<Side>,
    pub kind: ConstraintKind,
    /// Amount by which the inequality is violated, in ticks.
    pub slack_ticks: f64,
}

/// Lists every violated state constraint; empty for a valid state.
///
/// The depth constraint bounds the distance from the mid to the deepest
/// modelled level: ½s + m_T + m_D − 1 ≤ M_{1/2}.
pub fn check_constraints(state: &LobState) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let s = state.spread_ticks();
    if s < 1 {
        out.push(ConstraintViolation {
            side: None,
            kind: ConstraintKind::CrossedBook,
            slack_ticks: (1 - s) as f64,
        });
    }
    for side in Side::BOTH {
        let st = state.side(side);
        let mut push = |kind, slack: f64| {
            out.push(ConstraintViolation { side: Some(side), kind, slack_ticks: slack })
        };
        if !st.best_price.is_on_tick() {
            push(ConstraintKind::OffTickQuote, 0.5);
        }
        if st.m_top < 1 {
            push(ConstraintKind::MinTopWidth, (1 - st.m_top) as f64);
        }
        if st.m_deep < 1 {
            push(ConstraintKind::MinDeepWidth, (1 - st.m_deep) as f64);
        }
        if st.q_top < 1 {
            push(ConstraintKind::EmptyTopQueue, (1 - st.q_top) as f64);
        }
        if st.q_deep < 1 {
            push(ConstraintKind::EmptyDeepQueue, (1 - st.q_deep) as f64);
        }
        let excess = state.deepest_half_ticks(side) - 2 * state.m_half_depth;
        if excess > 0 {
            push(ConstraintKind::DepthOverflow, excess as f64 / 2.0);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderKind {
    Limit,
    Cancel,
    Market,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetaQueue {
    Deep,
    Top,
    InSpread,
}

/// The 12 event types in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventType {
    #[serde(rename = "LO_ask_D")]
    LoAskDeep,
    #[serde(rename = "CO_ask_D")]
    CoAskDeep,
    #[serde(rename = "LO_ask_T")]
    LoAskTop,
    #[serde(rename = "CO_ask_T")]
    CoAskTop,
    #[serde(rename = "MO_ask")]
    MoAsk,
    #[serde(rename = "LO_ask_IS")]
    LoAskInSpread,
    #[serde(rename = "LO_bid_IS")]
    LoBidInSpread,
    #[serde(rename = "LO_bid_T")]
    LoBidTop,
    #[serde(rename = "CO_bid_T")]
    CoBidTop,
    #[serde(rename = "MO_bid")]
    MoBid,
    #[serde(rename = "LO_bid_D")]
    LoBidDeep,
    #[serde(rename = "CO_bid_D")]
    CoBidDeep,
}

pub const NUM_EVENT_TYPES: usize = 12;

impl EventType {
    pub const ALL: [EventType; NUM_EVENT_TYPES] = [
        EventType::LoAskDeep,
        EventType::CoAskDeep,
        EventType::LoAskTop,
        EventType::CoAskTop,
        EventType::MoAsk,
        EventType::LoAskInSpread,
        EventType::LoBidInSpread,
        EventType::LoBidTop,
        EventType::CoBidTop,
        EventType::MoBid,
        EventType::LoBidDeep,
        EventType::CoBidDeep,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<EventType> {
        Self::ALL.get(i).copied()
    }

    /// The book side whose queues the event acts on. `MO_ask` consumes the ask.
    pub fn side(self) -> Side {
        if self.index() < 6 {
            Side::Ask
        } else {
            Side::Bid
        }
    }

    pub fn mirror(self) -> EventType {
        use EventType::*;
        match self {
            LoAskDeep => LoBidDeep,
            CoAskDeep => CoBidDeep,
            LoAskTop => LoBidTop,
            CoAskTop => CoBidTop,
            MoAsk => MoBid,
            LoAskInSpread => LoBidInSpread,
            LoBidInSpread => LoAskInSpread,
            LoBidTop => LoAskTop,
            CoBidTop => CoAskTop,
            MoBid => MoAsk,
            LoBidDeep => LoAskDeep,
            CoBidDeep => CoAskDeep,
        }
    }

    pub fn kind(self) -> OrderKind {
        use EventType::*;
        match self {
            LoAskDeep | LoAskTop | LoAskInSpread | LoBidInSpread | LoBidTop | LoBidDeep => OrderKind::Limit,
            CoAskDeep | CoAskTop | CoBidTop | CoBidDeep => OrderKind::Cancel,
            MoAsk | MoBid => OrderKind::Market,
        }
    }

    pub fn queue(self) -> MetaQueue {
        use EventType::*;
        match self {
            LoAskDeep | CoAskDeep | LoBidDeep | CoBidDeep => MetaQueue::Deep,
            LoAskInSpread | LoBidInSpread => MetaQueue::InSpread,
            _ => MetaQueue::Top,
        }
    }

    pub fn is_in_spread(self) -> bool {
        self.queue() == MetaQueue::InSpread
    }

    pub fn of(side: Side, kind: OrderKind, queue: MetaQueue) -> Option<EventType> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.side() == side && e.kind() == kind && e.queue() == queue)
    }

    pub fn label(self) -> &'static str {
        use EventType::*;
        match self {
            LoAskDeep => "LO_ask_D",
            CoAskDeep => "CO_ask_D",
            LoAskTop => "LO_ask_T",
            CoAskTop => "CO_ask_T",
            MoAsk => "MO_ask",
            LoAskInSpread => "LO_ask_IS",
            LoBidInSpread => "LO_bid_IS",
            LoBidTop => "LO_bid_T",
            CoBidTop => "CO_bid_T",
            MoBid => "MO_bid",
            LoBidDeep => "LO_bid_D",
            CoBidDeep => "CO_bid_D",
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EventType {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| CoreError::Domain(format!("unknown event type {s:?}")))
    }
}

/// One realized event together with the post-event book.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub event_type: EventType,
    pub size: i64,
    /// Distance in ticks from the same-side best before the event: price
    /// improvement for in-spread orders, depth behind the best otherwise.
    pub offset_ticks: i64,
    pub depleted_levels: u32,
    pub mid_before: TickPrice,
    pub spread_before: i64,
    pub bid: SideState,
    pub ask: SideState,
}

impl EventRecord {
    pub fn spread_after(&self) -> i64 {
        (self.ask.best_price.half_ticks() - self.bid.best_price.half_ticks()).div_euclid(2)
    }

    pub fn mid_after(&self) -> TickPrice {
        TickPrice::from_half_ticks((self.ask.best_price.half_ticks() + self.bid.best_price.half_ticks()) / 2)
    }

    pub fn side_after(&self, side: Side) -> &SideState {
        match side {
            Side::Bid => &self.bid,
            Side::Ask => &self.ask,
        }
    }

    pub fn state_after(&self, m_half_depth: i64) -> LobState {
        LobState { bid: self.bid, ask: self.ask, m_half_depth, sim_time: self.time }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn side(best: i64, m_top: i64, m_deep: i64) -> SideState {
        SideState { best_price: TickPrice::from_ticks(best), q_top: 10, m_top, q_deep: 100, m_deep }
    }

    fn state(m: i64, s: i64, ask_top: i64, ask_deep: i64, bid_top: i64, bid_deep: i64) -> LobState {
        LobState {
            bid: side(100, bid_top, bid_deep),
            ask: side(100 + s, ask_top, ask_deep),
            m_half_depth: m,
            sim_time: 0.0,
        }
    }

    #[test]
    fn relative_tick_size_examples() {
        assert!((relative_tick_size(0.01, 6.07).unwrap() - 16.47).abs() < 0.005);
        assert!((relative_tick_size(0.01, 1859.92).unwrap() - 0.05).abs() < 0.005);
        assert_eq!(relative_tick_size(1.0, 10000.0).unwrap(), 1.0);
        assert!(relative_tick_size(0.0, 1.0).is_err());
        assert!(relative_tick_size(0.01, -3.0).is_err());
    }

    #[test]
    fn constraints_accept_valid_book() {
        // 5 + 3 + 22 - 1 = 29 <= 30
        assert!(check_constraints(&state(30, 10, 3, 22, 3, 22)).is_empty());
    }

    #[test]
    fn constraints_report_depth_overflow() {
        let v = check_constraints(&state(30, 10, 4, 29, 3, 22));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].side, Some(Side::Ask));
        assert_eq!(v[0].kind, ConstraintKind::DepthOverflow);
        assert_eq!(v[0].slack_ticks, 7.0);
    }

    #[test]
    fn constraints_report_min_depth() {
        let v = check_constraints(&state(30, 10, 3, 22, 3, 0));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].side, Some(Side::Bid));
        assert_eq!(v[0].kind, ConstraintKind::MinDeepWidth);
    }

    #[test]
    fn mid_price_examples() {
        let mut st = state(30, 1, 1, 1, 1, 1);
        assert_eq!(mid_price(&st).unwrap().half_ticks(), 201);
        st.ask.best_price = TickPrice::from_ticks(110);
        assert_eq!(mid_price(&st).unwrap().half_ticks(), 210);
        st.ask.best_price = TickPrice::from_ticks(100);
        assert!(matches!(mid_price(&st), Err(CoreError::CrossedBook { .. })));
    }

    #[test]
    fn event_type_order_and_mirror() {
        for (i, e) in EventType::ALL.iter().enumerate() {
            assert_eq!(e.index(), i);
            assert_eq!(e.mirror().mirror(), *e);
            assert_eq!(e.mirror().side(), e.side().opposite());
            assert_eq!(e.mirror().kind(), e.kind());
            assert_eq!(e.mirror().queue(), e.queue());
            assert_eq!(e.label().parse::<EventType>().unwrap(), *e);
        }
        assert_eq!(EventType::LoAskDeep.mirror(), EventType::LoBidDeep);
        assert_eq!(EventType::LoAskInSpread.mirror(), EventType::LoBidInSpread);
        assert_eq!(EventType::of(Side::Bid, OrderKind::Market, MetaQueue::Top), Some(EventType::MoBid));
    }

    #[test]
    fn mirrored_state_swaps_sides() {
        let st = state(30, 7, 2, 5, 3, 9);
        let m = st.mirrored();
        assert_eq!(m.spread_ticks(), 7);
        assert_eq!(m.bid.m_top, 2);
        assert_eq!(m.ask.m_deep, 9);
        assert_eq!(mid_price(&m).unwrap(), mid_price(&st).unwrap());
        assert_eq!(m.mirrored(), st);
    }

    #[test]
    fn tick_price_display() {
        assert_eq!(TickPrice::from_half_ticks(201).to_string(), "100.5");
        assert_eq!(TickPrice::from_ticks(7).to_string(), "7");
    }
}
