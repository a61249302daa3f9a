use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn liwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liwave")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, seed: &str) {
    let out = liwave(&["simulate", "--re", "1.82e-29", "--im", "2.40e-29", "--seed", seed, "--out", p(dir)]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cell_reports_ratio_and_length() {
    let v = json_stdout(&liwave(&["cell", "--pressure-mbar", "1e-4"]));
    assert_eq!(v["schema_version"], 1);
    let ratio = v["data"]["ratio"].as_f64().unwrap();
    assert!((0.88..=0.92).contains(&ratio));
    assert!((v["data"]["effective_length"].as_f64().unwrap() - 0.0665).abs() < 1e-3);

    let v = json_stdout(&liwave(&["--units", "mbar-angstrom", "cell", "--pressure-mbar", "1e-4"]));
    assert_eq!(v["units"]["length"], "angstrom");
    assert!((v["data"]["effective_length"].as_f64().unwrap() - 6.65e8).abs() < 1e7);
    assert!((v["data"]["gas_state"]["p_meas"].as_f64().unwrap() - 1e-4).abs() < 1e-12);
}

#[test]
fn potential_eval_writes_csv() {
    let cfg = configs().join("li_xe_bc.json");
    let out = liwave(&["--config", p(&cfg), "potential", "eval", "--r-min", "3e-10", "--r-max", "1e-9", "--points", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,V");
    assert_eq!(lines.len(), 6);
    // the well: V < 0 at large r, V > 0 on the repulsive wall
    assert!(lines[1].split(',').nth(1).unwrap().parse::<f64>().unwrap() > 0.0);
    assert!(lines[5].split(',').nth(1).unwrap().parse::<f64>().unwrap() < 0.0);
}

#[test]
fn simulate_then_analyze_recovers_index() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    simulate(&runs, "5");
    let manifest = read_json(&runs.join("manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["data"]["seed"], 5);

    let report = dir.path().join("analysis.json");
    let out = liwave(&["analyze", "--runs", p(&runs), "--beam-velocity", "1075", "--out", p(&report)]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&report);
    let idx = &v["data"]["index"];
    let pull = |key: &str, err: &str, truth: f64| (idx[key].as_f64().unwrap() - truth) / idx[err].as_f64().unwrap();
    assert!(pull("re_per_density", "re_err", 1.82e-29).abs() < 5.0);
    assert!(pull("im_per_density", "im_err", 2.40e-29).abs() < 5.0);
    assert!(dir.path().join("analysis.series.csv").exists());
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    simulate(&a, "9");
    simulate(&b, "9");
    simulate(&c, "10");
    let run = |d: &Path| std::fs::read(d.join("run_002.json")).unwrap();
    assert_eq!(run(&a), run(&b));
    assert_ne!(run(&a), run(&c));
}

#[test]
fn corrupted_run_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    simulate(&runs, "2");
    let bad = runs.join("run_001.json");
    let text = std::fs::read_to_string(&bad).unwrap();
    std::fs::write(&bad, &text[..text.len() / 2]).unwrap();
    let out = liwave(&["analyze", "--runs", p(&runs), "--beam-velocity", "1075"]);
    assert_eq!(out.status.code(), Some(5));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("E_PARSE") && err.contains("run_001.json"), "{err}");
}

#[test]
fn missing_config_and_bad_arguments_fail_cleanly() {
    let out = liwave(&["--config", "/nonexistent/pot.json", "potential", "eval", "--r-min", "1e-10", "--r-max", "1e-9"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_IO"));

    let out = liwave(&["simulate", "--re", "1e-29"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_CONFIG"));

    let out = liwave(&["cell", "--pressure", "-1"]);
    assert!(!out.status.success());
}

#[test]
fn endtoend_round_trip_passes() {
    let dir = tempfile::tempdir().unwrap();
    let workflow = configs().join("workflow_default.json");
    let out = liwave(&["endtoend", "--workflow", p(&workflow), "--trials", "5", "--out", p(dir.path())]);
    let v = json_stdout(&out);
    assert_eq!(v["endtoend"], "PASS");
    assert_eq!(v["schema_version"], 1);
    let report = read_json(&dir.path().join("endtoend_report.json"));
    assert_eq!(report["schema_version"], 1);
    assert!(dir.path().join("runs").join("trial_004").join("run_004.json").exists());
}
