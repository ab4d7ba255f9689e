use std::io::Write;
use std::path::{Path, PathBuf};

use mqh_analytics::EventLog;
use mqh_core::EventType;
use mqh_dynamics::run_simulation;
use mqh_io::*;
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
    p
}

fn no_session(tick: f64, m: i64) -> ClassifyOptions {
    ClassifyOptions { session: None, ..ClassifyOptions::new(tick, m) }
}

const BOOK0: &str = "1000100,100,999900,100,1000200,50,999800,50";

#[test]
fn three_row_fixture_parses() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.csv",
        "34200.1,1,1,10,1000100,-1\n34200.2,2,1,5,1000100,-1\n34200.3,4,2,20,999900,1\n",
    );
    let b = write(
        dir.path(),
        "b.csv",
        "1000100,110,999900,100,1000200,50,999800,50\n\
         1000100,105,999900,100,1000200,50,999800,50\n\
         1000100,105,999900,80,1000200,50,999800,50\n",
    );
    let rows: Vec<_> = parse_lobster(&m, &b, 0.01).unwrap().collect::<Result<_>>().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].0.kind, LobsterKind::Submission);
    assert_eq!(rows[0].0.direction, Direction::Sell);
    assert_eq!(rows[2].0.kind, LobsterKind::VisibleExecution);
    assert_eq!(rows[2].1.bids[0], (999900, 80));
    assert_eq!(rows[1].1.asks.len(), 2);
}

#[test]
fn empty_files_give_empty_stream() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.csv", "");
    let b = write(dir.path(), "b.csv", "");
    assert_eq!(parse_lobster(&m, &b, 0.01).unwrap().count(), 0);
    assert!(classify_lobster(&m, &b, &no_session(0.01, 10)).is_err());
}

#[test]
fn short_orderbook_is_an_alignment_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.csv", "1.0,1,1,10,1000100,-1\n2.0,1,2,10,1000100,-1\n");
    let b = write(dir.path(), "b.csv", &format!("{BOOK0}\n"));
    let out: Vec<_> = parse_lobster(&m, &b, 0.01).unwrap().collect();
    assert_eq!(out.len(), 2);
    assert!(out[0].is_ok());
    match &out[1] {
        Err(IoError::Alignment { line, .. }) => assert_eq!(*line, 2),
        other => panic!("expected alignment error, got {other:?}"),
    }
}

#[test]
fn off_grid_price_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.csv", "1.0,1,1,10,1000150,-1\n");
    let b = write(dir.path(), "b.csv", &format!("{BOOK0}\n"));
    match parse_lobster(&m, &b, 0.01).unwrap().next() {
        Some(Err(IoError::Parse { line, .. })) => assert_eq!(line, 1),
        other => panic!("unexpected {other:?}"),
    }
}

fn classify_rows(rows: &[(&str, &str)]) -> LobsterDataset {
    let dir = tempfile::tempdir().unwrap();
    let m: String = rows.iter().map(|r| format!("{}\n", r.0)).collect();
    let b: String = rows.iter().map(|r| format!("{}\n", r.1)).collect();
    let m = write(dir.path(), "m.csv", &m);
    let b = write(dir.path(), "b.csv", &b);
    classify_lobster(&m, &b, &no_session(0.01, 10)).unwrap()
}

#[test]
fn classification_examples() {
    // spread of 3 ticks, second ask level 2 ticks behind the best
    let book = "1000200,100,999900,100,1000400,50,999800,50";
    let ds = classify_rows(&[
        ("1.0,1,1,1,1000200,-1", book),
        // in-spread ask one tick inside
        ("2.0,1,2,10,1000100,-1", "1000100,10,999900,100,1000200,100,999800,50"),
        // top limit at the best
        ("3.0,1,3,10,1000100,-1", "1000100,20,999900,100,1000200,100,999800,50"),
        // deep bid two ticks behind the best
        ("4.0,1,4,5,999700,1", "1000100,20,999900,100,1000200,100,999800,50"),
        // full cancel at the bid best is a top cancel
        ("5.0,3,5,100,999900,1", "1000100,20,999800,50,1000200,100,999700,5"),
        // sell order executed: buyer lifted the ask, depleting one level
        ("6.0,4,6,20,1000100,-1", "1000200,100,999800,50,1000400,50,999700,5"),
        // far beyond the window
        ("7.0,1,7,5,1100000,-1", "1000200,100,999800,50,1000400,50,999700,5"),
    ]);
    let types: Vec<EventType> = ds.log.records.iter().map(|r| r.event_type).collect();
    assert_eq!(
        types,
        vec![EventType::LoAskInSpread, EventType::LoAskTop, EventType::LoBidDeep, EventType::CoBidTop, EventType::MoAsk]
    );
    let r = &ds.log.records;
    assert_eq!(r[0].offset_ticks, 1);
    assert_eq!(r[2].offset_ticks, 2);
    assert_eq!(r[4].depleted_levels, 1);
    assert_eq!(ds.counters.dropped_beyond_depth, 1);
    assert_eq!(ds.log.initial.ask.m_top, 2);
    assert_eq!(ds.log.initial.ask.q_deep, 50);
}

#[test]
fn same_time_executions_merge() {
    let ds = classify_rows(&[
        ("1.0,1,1,1,1000100,-1", "1000100,40,999900,100,1000200,50,999800,50"),
        ("2.0,4,2,10,1000100,-1", "1000100,30,999900,100,1000200,50,999800,50"),
        ("2.0,4,3,30,1000100,-1", "1000200,50,999900,100,1000300,50,999800,50"),
    ]);
    assert_eq!(ds.log.records.len(), 1);
    assert_eq!(ds.log.records[0].size, 40);
    assert_eq!(ds.log.records[0].depleted_levels, 1);
    assert_eq!(ds.counters.merged_executions, 1);
}

#[test]
fn sample_day_classifies_without_drops() {
    let opts = ClassifyOptions::new(0.01, 10);
    let ds = classify_lobster(&fixture("sample_message_5.csv"), &fixture("sample_orderbook_5.csv"), &opts).unwrap();
    assert!(ds.log.validate().is_ok());
    assert_eq!(ds.counters.dropped_beyond_depth, 0);
    assert!(ds.counters.dropped_fraction() < 0.01, "{:?}", ds.counters);
    assert!(ds.counters.hidden_executions > 0);
    assert!(ds.log.records.len() > 30);
    // each record's post-event book is consistent with the next pre-event book
    for (b, a, r) in ds.log.with_pre_state() {
        assert!(a.best_price > b.best_price);
        assert_eq!(r.mid_before.half_ticks(), (a.best_price.half_ticks() + b.best_price.half_ticks()) / 2);
    }
    let total: f64 = ds.books.iter().map(|b| b.1).sum();
    assert!((total - ds.log.duration()).abs() < 1e-6);
}

fn small_log(seed: u64) -> EventLog {
    let mut cfg = reference_config();
    cfg.run.horizon = 30.0;
    cfg.run.seed = seed;
    let run = cfg.resolve().unwrap();
    let out = run_simulation(&run.spec, &run.handlers, &run.init, &run.settings).unwrap();
    EventLog {
        start: 0.0,
        end: run.settings.horizon,
        tick_size: 0.01,
        m_half_depth: run.settings.m_half_depth,
        initial: out.initial,
        records: out.records,
    }
}

#[test]
fn event_log_round_trip_is_byte_identical() {
    let log = small_log(3);
    let mut first = Vec::new();
    write_event_log(&log, &mut first).unwrap();
    let back = read_event_log(first.as_slice(), "mem").unwrap();
    assert_eq!(back.records, log.records);
    assert_eq!(back.initial.bid, log.initial.bid);
    let mut second = Vec::new();
    write_event_log(&back, &mut second).unwrap();
    assert_eq!(first, second);
}

#[test]
fn snapshots_round_trip() {
    let mut cfg = reference_config();
    cfg.run.horizon = 20.0;
    cfg.run.snapshot_every = 10;
    let run = cfg.resolve().unwrap();
    let out = run_simulation(&run.spec, &run.handlers, &run.init, &run.settings).unwrap();
    let mut buf = Vec::new();
    write_snapshots(&out.snapshots, &mut buf).unwrap();
    let back = read_snapshots(buf.as_slice(), "mem").unwrap();
    assert_eq!(back.len(), out.snapshots.len());
    assert!(back.iter().zip(&out.snapshots).all(|(a, b)| *a == SnapshotLine::from(b)));
}

#[test]
fn bad_log_rows_report_line_numbers() {
    let mut buf = Vec::new();
    write_event_log(&small_log(4), &mut buf).unwrap();
    let mut text = String::from_utf8(buf).unwrap();
    text = text.replacen("LO_ask_T", "LO_nope", 1);
    match read_event_log(text.as_bytes(), "x.csv") {
        Err(IoError::Parse { line, message, .. }) => {
            assert!(line >= 4);
            assert!(message.contains("LO_nope"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_mu_names_the_field() {
    let mut v = serde_json::to_value(reference_config()).unwrap();
    v["hawkes"].as_object_mut().unwrap().remove("mu");
    match RunConfig::from_value(v) {
        Err(IoError::Schema { path, message }) => {
            assert!(path.contains("hawkes") || message.contains("mu"));
            assert!(message.contains("mu"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v = serde_json::to_value(reference_config()).unwrap();
    v["run"]["sed"] = 3.into();
    assert!(matches!(RunConfig::from_value(v), Err(IoError::Schema { .. })));
}

#[test]
fn shipped_reference_config_matches_code() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.json");
    let cfg = read_run_config(&path).unwrap();
    assert_eq!(cfg, reference_config());
    let run = cfg.resolve().unwrap();
    assert!(mqh_hawkes::kernel_norm_matrix(&run.spec, None).unwrap().stable);
}

#[test]
fn merge_replaces_handler_variant() {
    let mut base = serde_json::to_value(reference_config()).unwrap();
    let frag = serde_json::json!({"hawkes": {"is_alpha": 1.5}, "handlers": {"standard": {"eta": [0.5, 0.5, 0.5], "kappa_mean": 10.0, "deep_level_mean": 5.0}}});
    merge_json(&mut base, &frag);
    let cfg = RunConfig::from_value(base).unwrap();
    assert_eq!(cfg.hawkes.is_alpha, 1.5);
    assert_eq!(cfg.hawkes.mu, REFERENCE_MU);
    assert!(matches!(cfg.handlers, HandlersConfig::Standard { kappa_mean, .. } if kappa_mean == 10.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_any_seed(seed in 0u64..1000) {
        let log = small_log(seed);
        let mut buf = Vec::new();
        write_event_log(&log, &mut buf).unwrap();
        let back = read_event_log(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back.records, log.records);
        prop_assert_eq!(back.start, log.start);
        prop_assert_eq!(back.end, log.end);
    }
}
