use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mqh_cli::{run_phase_diagram, run_scaling, CliError, PhaseOptions, ScalingOptions};
use mqh_io::reference_config;

fn mqh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqh")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../io/tests/fixtures").join(name)
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn fixed_seed_gives_identical_output_trees() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = mqh(&["simulate", "--seed", "3", "--horizon", "200", "--out", s(d)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key(Path::new("events.csv")) && ta.contains_key(Path::new("summary.json")));
    assert_eq!(ta, tb);
}

#[test]
fn invalid_config_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::to_value(reference_config()).unwrap();
    v["hawkes"].as_object_mut().unwrap().remove("mu");
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, v.to_string()).unwrap();
    let o = mqh(&["simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));
}

#[test]
fn empty_grid_is_a_usage_error() {
    let o = mqh(&["phase-diagram", "--grid", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let opts = PhaseOptions { alphas: vec![], ..PhaseOptions::default_grid(2) };
    assert!(matches!(run_phase_diagram(&reference_config(), &opts), Err(CliError::Usage(_))));
}

#[test]
fn one_point_scaling_grid_cannot_regress() {
    let mut cfg = reference_config();
    cfg.run.horizon = 300.0;
    let opts = ScalingOptions { points: vec![(0.95, 0.6, 0.3)], seeds: 1, jobs: 1 };
    match run_scaling(&cfg, &opts) {
        Err(CliError::Runtime(m)) => assert!(m.contains("at least 2"), "{m}"),
        other => panic!("{other:?}"),
    }
    let tmp = tempfile::tempdir().unwrap();
    let o = mqh(&["scaling", "--points", "0.95:0.6:0.3", "--seeds", "1", "--horizon", "300", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let o = mqh(&["scaling", "--points", "0.95:0.6", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mqh(&["report", "--log", s(&tmp.path().join("nope.csv")), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = mqh(&["calibrate", "--message", "nope_m.csv", "--orderbook", "nope_b.csv", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_on_the_lobster_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = mqh(&[
        "report",
        "--message",
        s(&fixture("sample_message_5.csv")),
        "--orderbook",
        s(&fixture("sample_orderbook_5.csv")),
        "--m-half-depth",
        "10",
        "--label",
        "fixture",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = tree(&out);
    for f in ["summary.json", "ingest.json", "events.csv", "shape.csv"] {
        assert!(files.contains_key(Path::new(f)), "missing {f}: {:?}", files.keys().collect::<Vec<_>>());
    }
}

#[test]
fn simulate_report_calibrate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let o = mqh(&["simulate", "--seed", "5", "--horizon", "10000", "--out", s(&sim)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cal = tmp.path().join("cal");
    let o = mqh(&["calibrate", "--log", s(&sim.join("events.csv")), "--out", s(&cal)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(cal.join("calibration.json")).unwrap()).unwrap();
    let beta = v["result"]["beta"].as_f64().unwrap();
    let alpha = v["result"]["alpha"].as_f64().unwrap();
    assert!((beta - 0.6).abs() < 0.1, "beta {beta}");
    assert!((alpha / 0.95 - 1.0).abs() < 0.25, "alpha {alpha}");
    let frag: serde_json::Value = serde_json::from_slice(&fs::read(cal.join("fragment.json")).unwrap()).unwrap();
    assert!(frag.get("hawkes").is_some());
}
