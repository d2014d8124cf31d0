use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn esfcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esfcheck"))
        .args(args)
        .env_remove("ESFCHECK_CONFIG")
        .env_remove("ESFCHECK_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn envelope(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).expect("JSON on stdout");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["elapsed_ms"].is_u64());
    v
}

fn payload_without_timing(o: &Output) -> Value {
    let mut v = envelope(o);
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn compute_prints_exact_and_decimal() {
    let o = esfcheck(&["compute", "--a", "1", "--b", "1", "--n", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("1"));

    let o = esfcheck(&["compute", "--a", "1", "--b", "1", "--n", "3", "--k", "1"]);
    assert_eq!(stdout(&o), "11/6\n1.83333333333\n");

    let o = esfcheck(&["compute", "--a", "1", "--b", "1", "--n", "3", "--k", "1", "--format", "json"]);
    let v = envelope(&o);
    assert_eq!(v["command"], "compute");
    assert_eq!(v["payload"]["value"], "11/6");
}

#[test]
fn usage_errors_exit_64() {
    let o = esfcheck(&["compute", "--a", "1", "--b", "1", "--n", "3", "--k", "4"]);
    assert_eq!(o.status.code(), Some(64));
    assert_eq!(esfcheck(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(esfcheck(&["decide", "--a", "1"]).status.code(), Some(64));
    assert_eq!(esfcheck(&["compute", "--a", "0", "--b", "1", "--n", "3", "--k", "1"]).status.code(), Some(64));
    assert_eq!(esfcheck(&["sweep", "--program", "2", "--a", "3"]).status.code(), Some(64));
    assert_eq!(esfcheck(&["--help"]).status.code(), Some(0));
}

#[test]
fn decide_exceptional_and_certified() {
    let o = esfcheck(&["decide", "--a", "7", "--b", "1", "--n", "1", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = envelope(&o);
    assert_eq!(v["payload"]["verdict"], "integer");
    assert_eq!(v["payload"]["evidence"]["which"], "b1n1k1");

    let o = esfcheck(&["decide", "--a", "1", "--b", "1", "--n", "12", "--k", "2"]);
    let v = envelope(&o);
    assert_eq!(v["payload"]["verdict"], "non-integer");
    assert_eq!(v["payload"]["evidence"]["kind"], "valuation-certificate");
    assert_eq!(v["payload"]["evidence"]["certificate"]["p"], "5");
    assert_eq!(v["payload"]["evidence"]["certificate"]["claimed_valuation"], "-2");

    let o = esfcheck(&["decide", "--a", "1", "--b", "1", "--n", "3", "--k", "2", "--mode", "theorem"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(envelope(&o)["payload"]["verdict"], "integer");
}

#[test]
fn witness_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = esfcheck(&["witness", "--a", "1", "--b", "1", "--n", "12", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(envelope(&o)["payload"]["p"], "5");
    let path = dir.path().join("cert.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let p = path.to_str().unwrap();

    let v = esfcheck(&["verify", p]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(envelope(&v)["payload"]["passed"], true);

    let v = esfcheck(&["verify", p, "--mode", "exhaustive"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(envelope(&v)["payload"]["exact_valuation"], "-2");

    // the bare payload is accepted too
    let bare = dir.path().join("bare.json");
    let cert = envelope(&o)["payload"].clone();
    std::fs::write(&bare, serde_json::to_string(&cert).unwrap()).unwrap();
    assert_eq!(esfcheck(&["verify", bare.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn edited_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = esfcheck(&["witness", "--a", "1", "--b", "1", "--n", "12", "--k", "2"]);
    let mut cert = envelope(&o)["payload"].clone();
    cert["p"] = Value::from("7");
    let path = dir.path().join("edited.json");
    std::fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
    let v = esfcheck(&["verify", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(envelope(&v)["payload"]["passed"], false);
}

#[test]
fn malformed_certificate_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(esfcheck(&["verify", path.to_str().unwrap()]).status.code(), Some(65));
    std::fs::write(&path, r#"{"a": "1"}"#).unwrap();
    assert_eq!(esfcheck(&["verify", path.to_str().unwrap()]).status.code(), Some(65));
    assert_eq!(esfcheck(&["verify", "/nonexistent/cert.json"]).status.code(), Some(65));
}

#[test]
fn no_witness_exits_3() {
    for n in ["7", "3"] {
        let o = esfcheck(&["witness", "--a", "1", "--b", "1", "--n", n, "--k", "2"]);
        assert_eq!(o.status.code(), Some(3), "n = {n}");
        assert_eq!(envelope(&o)["payload"]["found"], false);
    }
}

#[test]
fn table1_matches_fixture() {
    let fixture = include_str!("fixtures/table1.csv");
    let o = esfcheck(&["table1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), fixture);
    let text = stdout(&esfcheck(&["table1", "--format", "text"]));
    assert!(text.contains("p_{i_k}"));
    assert!(text.contains("541"));
}

#[test]
fn check_bounds_reports_json() {
    let o = esfcheck(&["check-bounds", "--a", "1", "--b", "1", "--n", "100", "--k", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let v = envelope(&o);
    assert_eq!(v["payload"]["large_k_regime"], true);
    assert_eq!(v["payload"]["rounding_mode"], "outward-certified");
}

#[test]
fn payloads_are_deterministic() {
    for args in [
        &["decide", "--a", "3", "--b", "5", "--n", "40", "--k", "6"][..],
        &["witness", "--a", "2", "--b", "3", "--n", "300", "--k", "3"][..],
        &["check-bounds", "--a", "2", "--b", "9", "--n", "20", "--k", "3"][..],
    ] {
        assert_eq!(payload_without_timing(&esfcheck(args)), payload_without_timing(&esfcheck(args)));
    }
}

#[test]
fn custom_sweep_with_csv_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("esfcheck.conf");
    std::fs::write(&cfg, "checkpoint_every = 7\n").unwrap();
    let csv = dir.path().join("report.csv");
    let ckpt = dir.path().join("ckpt");
    let o = esfcheck(&[
        "--config",
        cfg.to_str().unwrap(),
        "sweep",
        "--program",
        "custom",
        "--a",
        "1..2",
        "--b",
        "1",
        "--n-max",
        "30",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--jobs",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = envelope(&o);
    assert_eq!(v["payload"]["spec"]["checkpoint_every"], 7);
    let hits = v["payload"]["integer_hits"].as_array().unwrap();
    let cells: Vec<(u64, u64, u64, u64)> = hits
        .iter()
        .map(|h| (h["a"].as_u64().unwrap(), h["b"].as_u64().unwrap(), h["n"].as_u64().unwrap(), h["k"].as_u64().unwrap()))
        .collect();
    assert_eq!(cells, vec![(1, 1, 1, 1), (1, 1, 3, 2), (2, 1, 1, 1)]);
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("a,b,n_max"));
    assert!(csv.contains("1:1=1;3:2=1"));
    assert!(Path::new(&ckpt).join("manifest.json").exists());
}

#[test]
fn bad_config_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "sieve_limit = lots\n").unwrap();
    let o = esfcheck(&["--config", cfg.to_str().unwrap(), "table1"]);
    assert_eq!(o.status.code(), Some(65));
}

#[test]
fn smoke_sweep_program2() {
    let o = esfcheck(&["sweep", "--program", "2", "--smoke", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 45);
    assert!(out.lines().nth(1).unwrap().contains("3:2=1"));
}
