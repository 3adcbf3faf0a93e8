use std::fs;

use depbalance::{table_from_csv, CreationalEdge, EventRecord, ReportBundle, ScenarioFile, BATTLE_SCENARIO};
use depbalance_cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("depbalance").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_scenario(dir: &tempfile::TempDir, name: &str, file: &ScenarioFile) -> String {
    let p = dir.path().join(name);
    fs::write(&p, file.to_json()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn analyze_csv_is_headed_by_base() {
    let (code, out, _) = cli(&["analyze", "builtin:battle"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("asset,aggregate_value,ceasefire_seconds,source"));
    assert_eq!(lines.next(), Some("Base,55,900,explicit"));
    assert_eq!(out.lines().count(), 15);
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let (_, csv, _) = cli(&["analyze", "--scenario", "builtin:battle", "--format", "csv"]);
    let (_, json, _) = cli(&["analyze", "builtin:battle", "--format", "json"]);
    let bundle = ReportBundle::from_json(&json).unwrap();
    assert_eq!(table_from_csv(&csv).unwrap(), bundle.table);
}

#[test]
fn analyze_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let (code, out, _) = cli(&["analyze", "builtin:battle", "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(fs::read_to_string(path).unwrap().starts_with("asset,"));
}

#[test]
fn validate_bundled_and_file_scenarios() {
    let (code, out, _) = cli(&["validate", "builtin:battle"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("ok (14 assets, 14 edges)"));

    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(&dir, "copy.json", &ScenarioFile::from_json(BATTLE_SCENARIO).unwrap());
    assert_eq!(cli(&["validate", &path]).0, EXIT_OK);
}

#[test]
fn validate_prints_cycle_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut file = ScenarioFile::from_json(BATTLE_SCENARIO).unwrap();
    file.edges.push(CreationalEdge::new("Soldiers", "Bank", 1));
    let path = write_scenario(&dir, "cyclic.json", &file);
    let (code, out, err) = cli(&["validate", &path]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.contains("cycle: Bank -> Barrack -> Soldiers -> Bank"), "{out}");
    assert!(err.contains("validation error"));
}

#[test]
fn syntax_errors_report_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\n  \"assets\": [,]\n}\n").unwrap();
    let (code, _, err) = cli(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn empty_document_has_no_assets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.json");
    fs::write(&p, "").unwrap();
    let (code, out, _) = cli(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.contains("no assets defined"));
    // analyze refuses invalid scenarios too
    assert_eq!(cli(&["analyze", p.to_str().unwrap()]).0, EXIT_INVALID);
}

#[test]
fn file_errors_exit_nonzero_with_message() {
    let (code, _, err) = cli(&["analyze", "/definitely/not/here.json"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("cannot read"));
    let (code, _, err) = cli(&["validate", "builtin:chess"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("unknown builtin"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["frobnicate"][..],
        &["analyze", "builtin:battle", "--colour"],
        &["analyze"],
        &["analyze", "a.json", "--scenario", "b.json"],
        &["analyze", "builtin:battle", "--format", "xml"],
        &["simulate", "builtin:battle", "--matches", "0"],
        &["simulate", "builtin:battle", "--balancing", "sometimes"],
        &[],
    ] {
        let (code, _, err) = cli(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    // unknown names come with usage text
    for args in [&["frobnicate"][..], &["analyze", "builtin:battle", "--colour"]] {
        assert!(cli(args).2.contains("Usage"), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("simulate"));
}

#[test]
fn simulate_prints_report_with_deltas() {
    let (code, out, _) = cli(&[
        "simulate",
        "builtin:battle",
        "--matches",
        "2",
        "--seed",
        "1",
        "--max-ticks",
        "300",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n_pairs"], 2);
    assert!(v["summary"]["players"]["human"]["delta"]["survival"].is_number());
    assert!(v["pairs"][0]["on"]["end_tick"].as_u64().unwrap() <= 300);
}

#[test]
fn simulate_single_arm_writes_only_that_arm() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = cli(&[
        "simulate",
        "--scenario",
        "builtin:battle",
        "--matches",
        "2",
        "--balancing",
        "off",
        "--ai",
        "balanced",
        "--human",
        "balanced",
        "--max-ticks",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("wrote "));
    let mut logs: Vec<String> = fs::read_dir(dir.path().join("logs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    logs.sort();
    assert_eq!(logs, ["pair_000_off.json", "pair_001_off.json"]);
    let log: Vec<EventRecord> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("logs/pair_000_off.json")).unwrap()).unwrap();
    assert_eq!(log.last().unwrap().tick, 200);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["arms"], "off");
    assert!(report["pairs"][0]["on"].is_null());
}

#[test]
fn event_log_records_have_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = cli(&[
        "simulate",
        "builtin:battle",
        "--matches",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(dir.path().join("logs/pair_000_on.json")).unwrap();
    let v: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_str(&text).unwrap();
    let mut kinds = std::collections::BTreeSet::new();
    for r in &v {
        let keys: Vec<&str> = r.keys().map(String::as_str).collect();
        assert_eq!(keys, ["asset", "count", "detail", "player", "tick", "type"]);
        kinds.insert(r["type"].as_str().unwrap().to_owned());
    }
    for k in [
        "income",
        "build",
        "attack",
        "attack_blocked",
        "destruction",
        "ceasefire_imposed",
        "match_end",
    ] {
        assert!(kinds.contains(k), "no {k} event");
    }
}
