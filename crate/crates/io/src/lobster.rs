//! LOBSTER message and orderbook files.
//!
//! Message rows: `time,type,order_id,size,price,direction` with time in
//! seconds after midnight, price in 10⁻⁴ currency units and direction −1
//! (sell) or 1 (buy). Orderbook rows hold `ask_price,ask_size,bid_price,bid_size`
//! for levels 1..K, describing the book after the message on the same line.
//! Empty levels carry the placeholder prices ±9999999999.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{open, IoError, Result};

pub const EMPTY_ASK_PRICE: i64 = 9_999_999_999;
pub const EMPTY_BID_PRICE: i64 = -9_999_999_999;
/// LOBSTER prices are currency × 10⁴.
pub const PRICE_SCALE: f64 = 10_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LobsterKind {
    Submission,
    Cancellation,
    Deletion,
    VisibleExecution,
    HiddenExecution,
    Cross,
    Halt,
}

impl LobsterKind {
    pub fn from_code(c: i64) -> Option<Self> {
        Some(match c {
            1 => LobsterKind::Submission,
            2 => LobsterKind::Cancellation,
            3 => LobsterKind::Deletion,
            4 => LobsterKind::VisibleExecution,
            5 => LobsterKind::HiddenExecution,
            6 => LobsterKind::Cross,
            7 => LobsterKind::Halt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Buy,
    Sell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawLobsterEvent {
    pub time: f64,
    pub kind: LobsterKind,
    pub order_id: i64,
    pub size: i64,
    pub price: i64,
    pub direction: Direction,
}

/// Occupied levels after an event, best first, as (price, size).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookSnapshotRow {
    pub asks: Vec<(i64, i64)>,
    pub bids: Vec<(i64, i64)>,
}

/// Streams aligned (message, orderbook) rows.
pub struct LobsterReader {
    messages: csv::StringRecordsIntoIter<File>,
    books: csv::StringRecordsIntoIter<File>,
    message_name: String,
    book_name: String,
    tick_units: i64,
    last_time: f64,
    done: bool,
}

impl LobsterReader {
    /// `tick_size` in currency; it must be a whole number of 10⁻⁴ units.
    pub fn open(message_file: &Path, orderbook_file: &Path, tick_size: f64) -> Result<Self> {
        let units = tick_size * PRICE_SCALE;
        if !(units >= 1.0) || (units - units.round()).abs() > 1e-9 {
            return Err(IoError::Invalid(format!("tick size {tick_size} is not a whole number of 1e-4 units")));
        }
        let reader = |p: &Path| -> Result<_> {
            Ok(csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(open(p)?).into_records())
        };
        Ok(LobsterReader {
            messages: reader(message_file)?,
            books: reader(orderbook_file)?,
            message_name: message_file.display().to_string(),
            book_name: orderbook_file.display().to_string(),
            tick_units: units.round() as i64,
            last_time: f64::NEG_INFINITY,
            done: false,
        })
    }

    pub fn tick_units(&self) -> i64 {
        self.tick_units
    }

    fn parse_message(&mut self, rec: &csv::StringRecord) -> Result<RawLobsterEvent> {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |m: String| IoError::Parse { file: self.message_name.clone(), line, message: m };
        if rec.len() < 6 {
            return Err(err(format!("expected 6 fields, got {}", rec.len())));
        }
        let int = |i: usize, name: &str| rec[i].trim().parse::<i64>().map_err(|_| err(format!("bad {name} {:?}", &rec[i])));
        let time: f64 = rec[0].trim().parse().map_err(|_| err(format!("bad time {:?}", &rec[0])))?;
        if !time.is_finite() {
            return Err(err(format!("bad time {:?}", &rec[0])));
        }
        if time < self.last_time {
            return Err(err(format!("time {time} is before the previous message at {}", self.last_time)));
        }
        let code = int(1, "type")?;
        let kind = LobsterKind::from_code(code).ok_or_else(|| err(format!("unknown event type {code}")))?;
        let direction = match int(5, "direction")? {
            1 => Direction::Buy,
            -1 => Direction::Sell,
            d => return Err(err(format!("direction must be 1 or -1, got {d}"))),
        };
        let price = int(4, "price")?;
        if kind != LobsterKind::Halt && price % self.tick_units != 0 {
            return Err(err(format!("price {price} is not a multiple of the tick ({} units)", self.tick_units)));
        }
        self.last_time = time;
        Ok(RawLobsterEvent { time, kind, order_id: int(2, "order id")?, size: int(3, "size")?, price, direction })
    }

    fn parse_book(&self, rec: &csv::StringRecord) -> Result<BookSnapshotRow> {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |m: String| IoError::Parse { file: self.book_name.clone(), line, message: m };
        if rec.is_empty() || rec.len() % 4 != 0 {
            return Err(err(format!("expected a multiple of 4 fields, got {}", rec.len())));
        }
        let mut asks = Vec::new();
        let mut bids = Vec::new();
        for k in 0..rec.len() / 4 {
            let v = |i: usize| rec[4 * k + i].trim().parse::<i64>().map_err(|_| err(format!("bad number {:?}", &rec[4 * k + i])));
            let (ap, asz, bp, bsz) = (v(0)?, v(1)?, v(2)?, v(3)?);
            for (p, s, empty, out) in [(ap, asz, EMPTY_ASK_PRICE, &mut asks), (bp, bsz, EMPTY_BID_PRICE, &mut bids)] {
                if p == empty || s == 0 {
                    continue;
                }
                if p % self.tick_units != 0 {
                    return Err(err(format!("price {p} is not a multiple of the tick")));
                }
                if s < 0 {
                    return Err(err(format!("negative size {s}")));
                }
                out.push((p, s));
            }
        }
        if asks.windows(2).any(|w| w[1].0 <= w[0].0) || bids.windows(2).any(|w| w[1].0 >= w[0].0) {
            return Err(err("prices are not monotone within a side".into()));
        }
        if let (Some(a), Some(b)) = (asks.first(), bids.first()) {
            if a.0 <= b.0 {
                return Err(err(format!("crossed book: ask {} <= bid {}", a.0, b.0)));
            }
        }
        Ok(BookSnapshotRow { asks, bids })
    }
}

impl Iterator for LobsterReader {
    type Item = Result<(RawLobsterEvent, BookSnapshotRow)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let m = self.messages.next();
        let b = self.books.next();
        let out = match (m, b) {
            (None, None) => {
                self.done = true;
                return None;
            }
            (Some(Err(e)), _) | (_, Some(Err(e))) => Err(e.into()),
            (Some(Ok(m)), None) => Err(IoError::Alignment {
                file: self.message_name.clone(),
                other: self.book_name.clone(),
                line: m.position().map(|p| p.line()).unwrap_or(0),
            }),
            (None, Some(Ok(b))) => Err(IoError::Alignment {
                file: self.book_name.clone(),
                other: self.message_name.clone(),
                line: b.position().map(|p| p.line()).unwrap_or(0),
            }),
            (Some(Ok(m)), Some(Ok(b))) => self.parse_message(&m).and_then(|ev| Ok((ev, self.parse_book(&b)?))),
        };
        if out.is_err() {
            self.done = true;
        }
        Some(out)
    }
}

pub fn parse_lobster(message_file: &Path, orderbook_file: &Path, tick_size: f64) -> Result<LobsterReader> {
    LobsterReader::open(message_file, orderbook_file, tick_size)
}
