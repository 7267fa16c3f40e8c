use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn tsncalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsncalc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let o = tsncalc(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn analyze_prints_exact_and_decimal() {
    let cfg = config("sp-port.json");
    let out = run_ok(&["analyze", "--config", cfg.to_str().unwrap(), "--queue", "2"]);
    assert!(out.contains("137/20 (6.85)"), "{out}");
    assert!(out.contains("59/8 (7.375)"), "{out}");
    assert!(out.contains("15/2 (7.5)"), "{out}");
}

#[test]
fn frozen_cbs_bound() {
    let cfg = config("cbs-frozen.json");
    let out = run_ok(&["analyze", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["queues"][1]["result"]["delayBound"], "68/5");
    assert!(v["queues"][2]["skipped"].is_string());
}

#[test]
fn compare_lists_the_four_bounds() {
    let cfg = config("single-flow.json");
    let out = run_ok(&["compare", "--config", cfg.to_str().unwrap()]);
    for label in ["D^(α,β)", "D^((α→)g,g)", "D^(α→g,β→g)", "D^(α,g^x)"] {
        assert!(out.contains(label), "{label} missing from {out}");
    }
    let csv = run_ok(&["compare", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.lines().any(|l| l == "1,D^(α,g^x),30"), "{csv}");
}

#[test]
fn counterexamples_show_violations() {
    let out = run_ok(&["counterexample", "all"]);
    for kind in ["link_arrival", "link_service", "sp_service", "cbs_service"] {
        assert!(out.contains(kind), "{out}");
    }
    assert!(out.contains("Violation"));
    let one = run_ok(&["counterexample", "sp_service", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn output_is_deterministic() {
    let cfg = config("sp-port.json");
    let a = run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "json", "--seed", "5"]);
    let b = run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "json", "--seed", "5"]);
    assert_eq!(a, b);
    let v1 = run_ok(&["verify", "--config", cfg.to_str().unwrap(), "--trials", "4", "--seed", "9"]);
    let v2 = run_ok(&["verify", "--config", cfg.to_str().unwrap(), "--trials", "4", "--seed", "9"]);
    assert_eq!(v1, v2);
}

#[test]
fn verify_passes_on_covered_ports() {
    for name in ["sp-port.json", "cbs-top.json", "cbs-frozen.json"] {
        let cfg = config(name);
        let out = run_ok(&["verify", "--config", cfg.to_str().unwrap(), "--trials", "4"]);
        assert!(out.contains(", 0 failed"), "{name}: {out}");
    }
}

#[test]
fn verify_flags_a_late_departure() {
    let dir = tempfile::tempdir().unwrap();
    let arrivals = dir.path().join("a.csv");
    let departures = dir.path().join("d.csv");
    fs::write(&arrivals, "n,time,length\n1,0,40\n").unwrap();
    fs::write(&departures, "n,time,length\n1,10,40\n").unwrap();
    let cfg = config("sp-port.json");
    let o = tsncalc(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--queue",
        "2",
        "--arrivals",
        arrivals.to_str().unwrap(),
        "--departures",
        departures.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL") && out.contains("delay bound"), "{out}");
}

#[test]
fn simulate_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("cbs-top.json");
    let report = dir.path().join("report.txt");
    run_ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--traces",
        dir.path().to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(&report).unwrap().contains("queue 1"));
    assert!(fs::read_to_string(dir.path().join("credit.csv")).unwrap().starts_with("start,end,slope,startValue"));
    assert!(dir.path().join("queue-2-departures.csv").exists());
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"linkRate": "100", "queues": [], "extra": 1}"#).unwrap();
    let o = tsncalc(&["analyze", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let over = dir.path().join("over.json");
    fs::write(
        &over,
        r#"{"linkRate": "100", "queues": [
            {"priority": 1, "selection": {"type": "sp"}, "flow": {"sigma": "100", "rho": "100", "lMin": "10", "lMax": "50"}},
            {"priority": 2, "selection": {"type": "sp"}, "flow": {"sigma": "100", "rho": "50", "lMin": "10", "lMax": "50"}}
        ]}"#,
    )
    .unwrap();
    let o = tsncalc(&["analyze", "--config", over.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = tsncalc(&["simulate", "--config", config("cbs-frozen.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rendered_config_parses_back() {
    let text = fs::read(config("cbs-top.json")).unwrap();
    let parsed = tsncalc_cli::parse_config(&text).unwrap();
    let again = tsncalc_cli::parse_config(tsncalc_cli::render_config(&parsed).as_bytes()).unwrap();
    assert_eq!(again, parsed);
}
