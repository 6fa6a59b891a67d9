//! Command-line contract: exit codes, output formats, and the stdout/file
//! switch behave the same way release to release.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kruglov"))
}

#[test]
fn transform_reports_root_two() {
    let out = bin()
        .args(["transform", "--law", "delta:1", "--tail-tol", "1e-12", "--space", "lp:2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let norm = v["norms"][0][1].as_f64().unwrap();
    assert!((norm - 2.0_f64.sqrt()).abs() < 1e-9, "norm {norm}");
    assert!(v["mass_at_zero"].as_f64().unwrap() >= 1.0 / std::f64::consts::E - 1e-12);
}

#[test]
fn bounds_csv_has_versioned_header_and_six_rows() {
    let out = bin()
        .args(["bounds", "--p", "2,4,8,16,32,64"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# bounds.v1"));
    let header = lines.next().unwrap();
    assert!(header.starts_with("p,lower,upper,"), "header {header}");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let fields: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(fields[1] <= fields[2], "lower > upper in {row}");
    }
}

#[test]
fn rosenthal_failure_exits_one() {
    let out = bin()
        .args([
            "rosenthal",
            "--ensemble",
            "fixtures/ensembles/e01_indicators.json",
            "--space",
            "lp:2",
            "--constant",
            "0.01",
        ])
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(false));
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().args(["norm"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing required args");
    let out = bin().args(["definitely-not-a-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "unknown subcommand");
}

#[test]
fn output_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("norm.json");
    let out = bin()
        .args(["norm", "--law", "delta:1", "--space", "lp:2", "--output"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "stdout not empty: {:?}", out.stdout);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(v["value"].as_f64().is_some());
}
