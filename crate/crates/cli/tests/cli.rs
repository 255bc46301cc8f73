use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use modal_lab::scenarios::ScenarioConfig;
use serde_json::Value;

fn modal_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modal-lab"))
        .args(args)
        .env_remove("MODAL_LAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn list_json_has_nine_scenarios_whose_configs_parse() {
    let out = modal_lab(&["list", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 9);
    for e in entries {
        let cfg = ScenarioConfig::from_json(&e["default_config"].to_string()).unwrap();
        assert_eq!(cfg.name, e["name"].as_str().unwrap());
        for p in e["parameters"].as_array().unwrap() {
            assert!(cfg.parameters.contains_key(p["name"].as_str().unwrap()));
        }
    }
    let text = modal_lab(&["list"]);
    assert_eq!(String::from_utf8(text.stdout).unwrap().lines().filter(|l| !l.starts_with(' ')).count(), 9);
}

#[test]
fn epr_with_equal_axes_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("epr.json");
    fs::write(
        &cfg,
        r#"{"name": "epr_bohm", "parameters": {"a": [0.6, 0.0, 0.8], "b": [0.6, 0.0, 0.8]}}"#,
    )
    .unwrap();
    let report = dir.path().join("epr-report.json");
    let out = modal_lab(&["run", "--config", path_str(&cfg), "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&report);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["schema_version"], 1);
    let checks = v["checks"].as_array().unwrap();
    let c = checks.iter().find(|c| c["name"] == "correlation_unperturbed").unwrap();
    assert!((c["value"].as_f64().unwrap() + 1.0).abs() <= 1e-12);
    assert!(checks.iter().all(|c| c["tolerance"].is_number()));
}

#[test]
fn unknown_scenario_is_a_usage_error_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = modal_lab(&["run", "--scenario", "no_such_thing", "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"name": "bell_check", "parameters": {"q": 1}}"#).unwrap();
    assert_eq!(modal_lab(&["run", "--config", path_str(&cfg), "--out", "-"]).status.code(), Some(2));
    fs::write(&cfg, "{not json").unwrap();
    assert_eq!(modal_lab(&["run", "--config", path_str(&cfg), "--out", "-"]).status.code(), Some(2));
    fs::write(&cfg, r#"{"name": "pbr"}"#).unwrap();
    let out = modal_lab(&["run", "--scenario", "bell_check", "--config", path_str(&cfg), "--out", "-"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_checks_exit_one_and_still_write_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("pbr.json");
    let out = modal_lab(&["run", "--scenario", "pbr", "--tolerance-scale", "1e-300", "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(1));
    let v = read_json(&report);
    assert_eq!(v["passed"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = modal_lab(&["run", "--scenario", "no_communication", "--seed", "11", "--out", path_str(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn curves_are_written_as_companion_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_modal-lab"))
        .args(["run", "--scenario", "bell_check"])
        .env("MODAL_LAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("bell_check-seed0.json").exists());
    let csv = fs::read_to_string(dir.path().join("bell_check-seed0.angle_scan.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.split(',').all(|h| h.contains('[') && h.ends_with(']')), "{header}");
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 1 + 91);
}

#[test]
fn csv_report_lists_checks() {
    let out = modal_lab(&["run", "--scenario", "ghz_mermin", "--format", "csv", "--out", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,value,expected,tolerance,comparison,passed\n"));
    assert!(text.lines().any(|l| l.starts_with("consistent_instruction_sets,0.0,0.0,")));
}

#[test]
fn verify_reports_residuals() {
    let out = modal_lab(&["verify", "--suite", "partial_trace", "--trials", "200", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let props = v["properties"].as_array().unwrap();
    let diagram = props.iter().find(|p| p["name"] == "diagram_commutation").unwrap();
    assert!(diagram["worst_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(diagram["passed"], 200);

    let out = modal_lab(&["verify", "--suite", "conditional_probs", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let norm = v["properties"].as_array().unwrap().iter().find(|p| p["name"] == "normalization").unwrap().clone();
    assert!(norm["worst_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_rejects_zero_trials_and_unknown_suites() {
    assert_eq!(modal_lab(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(modal_lab(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}
