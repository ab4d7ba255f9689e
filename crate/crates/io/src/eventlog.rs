//! Event log CSV and snapshot JSON-lines files.
//!
//! Event log layout:
//!
//! ```text
//! # mqh-log start=<s> end=<s> tick_size=<currency> m_half_depth=<ticks>
//! time,type,size,offset,bid,ask,q_top_bid,q_top_ask,m_top_bid,m_top_ask,q_deep_bid,q_deep_ask,m_deep_bid,m_deep_ask,depleted_levels
//! <start>,INIT,0,0,<initial book ...>,0
//! <one row per event, book after the event>
//! ```
//!
//! Prices are in ticks (a trailing `.5` marks a half tick) and times use the
//! shortest decimal form that reads back to the same double.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use mqh_analytics::EventLog;
use mqh_core::{EventRecord, EventType, LobState, SideState, TickPrice};
use mqh_dynamics::Snapshot;
use serde::{Deserialize, Serialize};

use crate::error::{create, open, IoError, Result};

pub const LOG_HEADER: [&str; 15] = [
    "time", "type", "size", "offset", "bid", "ask", "q_top_bid", "q_top_ask", "m_top_bid", "m_top_ask", "q_deep_bid",
    "q_deep_ask", "m_deep_bid", "m_deep_ask", "depleted_levels",
];
const MAGIC: &str = "# mqh-log";
const INIT: &str = "INIT";

fn price_text(p: TickPrice) -> String {
    (p.half_ticks() as f64 / 2.0).to_string()
}

fn parse_price(s: &str) -> Option<TickPrice> {
    let v: f64 = s.parse().ok()?;
    let h = v * 2.0;
    (h.fract() == 0.0).then(|| TickPrice::from_half_ticks(h as i64))
}

fn row(time: f64, label: &str, size: i64, offset: i64, bid: &SideState, ask: &SideState, depleted: u32) -> Vec<String> {
    vec![
        time.to_string(),
        label.to_string(),
        size.to_string(),
        offset.to_string(),
        price_text(bid.best_price),
        price_text(ask.best_price),
        bid.q_top.to_string(),
        ask.q_top.to_string(),
        bid.m_top.to_string(),
        ask.m_top.to_string(),
        bid.q_deep.to_string(),
        ask.q_deep.to_string(),
        bid.m_deep.to_string(),
        ask.m_deep.to_string(),
        depleted.to_string(),
    ]
}

pub fn write_event_log<W: Write>(log: &EventLog, out: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(
        out,
        "{MAGIC} start={} end={} tick_size={} m_half_depth={}",
        log.start, log.end, log.tick_size, log.m_half_depth
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOG_HEADER)?;
    w.write_record(row(log.start, INIT, 0, 0, &log.initial.bid, &log.initial.ask, 0))?;
    for r in &log.records {
        w.write_record(row(r.time, r.event_type.label(), r.size, r.offset_ticks, &r.bid, &r.ask, r.depleted_levels))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_event_log_file(log: &EventLog, path: &Path) -> Result<()> {
    write_event_log(log, create(path)?)
}

fn perr(file: &str, line: u64, message: impl Into<String>) -> IoError {
    IoError::Parse { file: file.into(), line, message: message.into() }
}

pub fn read_event_log<R: std::io::Read>(input: R, name: &str) -> Result<EventLog> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let meta = first.trim_end().strip_prefix(MAGIC).ok_or_else(|| perr(name, 1, "missing `# mqh-log` line"))?;
    let mut start = None;
    let mut end = None;
    let mut tick = None;
    let mut m = None;
    for kv in meta.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| perr(name, 1, format!("bad field {kv:?}")))?;
        let bad = || perr(name, 1, format!("bad value for {k}: {v:?}"));
        match k {
            "start" => start = Some(v.parse::<f64>().map_err(|_| bad())?),
            "end" => end = Some(v.parse::<f64>().map_err(|_| bad())?),
            "tick_size" => tick = Some(v.parse::<f64>().map_err(|_| bad())?),
            "m_half_depth" => m = Some(v.parse::<i64>().map_err(|_| bad())?),
            _ => return Err(perr(name, 1, format!("unknown field {k:?}"))),
        }
    }
    let (Some(start), Some(end), Some(tick_size), Some(m_half_depth)) = (start, end, tick, m) else {
        return Err(perr(name, 1, "need start, end, tick_size and m_half_depth"));
    };

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(LOG_HEADER.iter().copied()) {
        return Err(perr(name, 2, format!("header must be {}", LOG_HEADER.join(","))));
    }
    let mut initial: Option<LobState> = None;
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 3;
        if rec.len() != 15 {
            return Err(perr(name, line, format!("expected 15 fields, got {}", rec.len())));
        }
        let int = |j: usize| rec[j].parse::<i64>().map_err(|_| perr(name, line, format!("{}: bad integer {:?}", LOG_HEADER[j], &rec[j])));
        let price = |j: usize| parse_price(&rec[j]).ok_or_else(|| perr(name, line, format!("{}: bad price {:?}", LOG_HEADER[j], &rec[j])));
        let time: f64 = rec[0].parse().map_err(|_| perr(name, line, format!("bad time {:?}", &rec[0])))?;
        let bid = SideState { best_price: price(4)?, q_top: int(6)?, m_top: int(8)?, q_deep: int(10)?, m_deep: int(12)? };
        let ask = SideState { best_price: price(5)?, q_top: int(7)?, m_top: int(9)?, q_deep: int(11)?, m_deep: int(13)? };
        if &rec[1] == INIT {
            if initial.is_some() || !records.is_empty() {
                return Err(perr(name, line, "INIT row must come first and only once"));
            }
            initial = Some(LobState { bid, ask, m_half_depth, sim_time: time });
            continue;
        }
        let Some(init) = &initial else {
            return Err(perr(name, line, "first row must be INIT"));
        };
        let (pb, pa) = records.last().map(|r: &EventRecord| (r.bid, r.ask)).unwrap_or((init.bid, init.ask));
        let event_type: EventType = rec[1].parse().map_err(|_| perr(name, line, format!("unknown event type {:?}", &rec[1])))?;
        let depleted = rec[14].parse::<u32>().map_err(|_| perr(name, line, format!("bad depleted_levels {:?}", &rec[14])))?;
        records.push(EventRecord {
            time,
            event_type,
            size: int(2)?,
            offset_ticks: int(3)?,
            depleted_levels: depleted,
            mid_before: TickPrice::from_half_ticks((pb.best_price.half_ticks() + pa.best_price.half_ticks()) / 2),
            spread_before: (pa.best_price.half_ticks() - pb.best_price.half_ticks()).div_euclid(2),
            bid,
            ask,
        });
    }
    let initial = initial.ok_or_else(|| perr(name, 3, "no INIT row"))?;
    Ok(EventLog { start, end, tick_size, m_half_depth, initial, records })
}

pub fn read_event_log_file(path: &Path) -> Result<EventLog> {
    read_event_log(open(path)?, &path.display().to_string())
}

/// One JSON line of the snapshot file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLine {
    pub event_index: u64,
    pub time: f64,
    pub bid: SideState,
    pub ask: SideState,
}

impl From<&Snapshot> for SnapshotLine {
    fn from(s: &Snapshot) -> Self {
        SnapshotLine { event_index: s.event_index, time: s.state.sim_time, bid: s.state.bid, ask: s.state.ask }
    }
}

pub fn write_snapshots<W: Write>(snaps: &[Snapshot], out: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    for s in snaps {
        serde_json::to_writer(&mut out, &SnapshotLine::from(s))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshots<R: std::io::Read>(input: R, name: &str) -> Result<Vec<SnapshotLine>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| perr(name, i as u64 + 1, e.to_string()))?);
    }
    Ok(out)
}
