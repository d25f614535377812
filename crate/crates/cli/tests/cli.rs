use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaugecode"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn degenerate_lattice_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"lattice": {"dims": [1, 1], "boundary": "smooth"}, "truncation": {"D": 2}}"#);
    let out = run(&["--config", cfg.to_str().unwrap(), "verify", "gauge-fix-kl"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lattice.dims"), "{err}");
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"lattice": {"dims": [2, 2], "boundary": "smooth"}, "truncation": {"D": 2}, "recovery": {"protocl": "tree"}}"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "verify", "algebra"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("recovery"));

    let out = run(&["--tol", "2.5", "verify", "algebra"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.tol"));

    let out = run(&["--config", "/nonexistent/config.json", "verify", "algebra"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inapplicable_suite_is_a_config_error() {
    let out = run(&["verify", "fermion-frame"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("matter"));
}

#[test]
fn passing_suite_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "--seed", "11", "verify", "gauge-fix-kl"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let report = read_json(&dir.path().join("verify-gauge-fix-kl.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["suite"], "gauge-fix-kl");
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["config"]["truncation"]["D"], 2);
    assert!(report["config"]["output"].get("dir").is_none());
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-10);

    let csv = std::fs::read_to_string(dir.path().join("verify-gauge-fix-kl.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scenario,quantity,value"));
    assert!(lines.all(|l| l.starts_with("default,gauge-fix-kl.")));
}

#[test]
fn failing_suite_exits_one() {
    let out = run(&[
        "--config",
        scenario("single-link-2x2-periodic-d3.json").to_str().unwrap(),
        "verify",
        "single-link-recovery",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = scenario("matter-2x2-smooth-d4.json");
    for d in [&a, &b] {
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
            "verify",
            "fermion-recovery",
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["verify-fermion-recovery.json", "verify-fermion-recovery.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

fn inject(name: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out =
        run(&["--config", scenario(name).to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "inject-recover"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    read_json(&dir.path().join("inject-recover.json"))
}

#[test]
fn single_shift_on_vacuum() {
    let r = inject("vacuum-single-shift.json");
    let run = &r["data"]["runs"][0];
    let charges: Vec<i64> = serde_json::from_value(run["syndrome"]["charges"].clone()).unwrap();
    let mut nonzero: Vec<i64> = charges.iter().copied().filter(|&q| q != 0).collect();
    nonzero.sort_unstable();
    assert_eq!(nonzero, [-1, 1]);
    assert_eq!(run["correction"]["event"], "applied-shift-inverse");
    assert_eq!(run["correction"]["link"], 1);
    assert_eq!(run["correction"]["m"], 1);
    assert!((run["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn two_flips_on_even_sites() {
    let r = inject("vacuum-two-flips.json");
    let run = &r["data"]["runs"][0];
    assert_eq!(r["data"]["protocol"], "fermion");
    assert_eq!(run["syndrome"]["parity"], serde_json::json!([1, 0, 0, 1]));
    assert_eq!(run["correction"]["sites"], serde_json::json!([0, 3]));
    assert!((run["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn no_error_run() {
    let r = inject("vacuum-no-error.json");
    let run = &r["data"]["runs"][0];
    assert_eq!(run["error"], "I");
    assert_eq!(run["syndrome"]["parity"], serde_json::json!([0, 0, 0, 0]));
    assert_eq!(run["correction"]["event"], "no-correction");
}

#[test]
fn distance_reports_lower_bound_when_truncated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"lattice": {"dims": [2, 2], "boundary": "smooth"}, "truncation": {"D": 3}, "distance": {"w_max": 2}}"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "distance"]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(&dir.path().join("distance.json"));
    assert_eq!(r["data"]["u_distance"], ">= 3");
    assert!(r["data"]["report"]["witness"].is_null());
}

#[test]
fn lattice_info_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"lattice": {"dims": [3, 3], "boundary": "periodic"}, "truncation": {"D": 2}}"#);
    let out = run(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "lattice-info"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("lattice-info.csv")).unwrap();
    for row in [
        "default,lattice-info.vertices,9",
        "default,lattice-info.links,18",
        "default,lattice-info.plaquettes,9",
        "default,lattice-info.non_tree_links,10",
        "default,lattice-info.physical_dim,1024",
    ] {
        assert!(csv.lines().any(|l| l == row), "missing {row} in\n{csv}");
    }
}
