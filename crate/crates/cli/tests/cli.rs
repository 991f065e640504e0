use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn superbv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superbv")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1").join(name).display().to_string()
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = superbv(&all);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

fn strip_timings(v: &mut Value) {
    for c in v["checks"].as_array_mut().unwrap() {
        c.as_object_mut().unwrap().remove("elapsed_ms");
    }
}

#[test]
fn passing_atlas_exits_zero() {
    let (code, report) = json_report(&["verify-atlas", "--example", "cp", "--dims", "1", "1"]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "pass");
    assert_eq!(report["config"]["command"], "verify-atlas");
}

#[test]
fn fixture_file_is_accepted() {
    let (code, report) = json_report(&["verify-atlas", "--atlas", &fixture("cp1_2.json")]);
    assert_eq!(code, 0);
    assert!(!report["checks"].as_array().unwrap().is_empty());
}

#[test]
fn corrupted_atlas_exits_one_with_a_residual() {
    let (code, report) = json_report(&["verify-atlas", "--atlas", &fixture("conic_corrupted.json")]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "fail");
    let inverse = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "conic-corrupted.inverse.U0->U1")
        .unwrap();
    assert_eq!(inverse["status"], "fail");
    assert!(!inverse["data"]["residual"].as_array().unwrap().is_empty());
}

#[test]
fn bad_input_exits_two() {
    for args in [
        vec!["bv-check"],
        vec!["verify-atlas"],
        vec!["verify-atlas", "--example", "torus"],
        vec!["verify-atlas", "--atlas", "/nonexistent/atlas.json"],
        vec!["bv-check", "--dims", "1", "1", "--pmax", "0"],
    ] {
        let out = superbv(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["bv-check", "--dims", "1", "1", "--pmax", "2", "--xmax", "2", "--seed", "7", "--trials", "20"];
    let (c1, mut a) = json_report(&args);
    let (c2, mut b) = json_report(&args);
    assert_eq!((c1, c2), (0, 0));
    strip_timings(&mut a);
    strip_timings(&mut b);
    assert_eq!(a, b);
    assert_eq!(a["config"]["seed"], 7);
}

#[test]
fn ext_reports_a_witness_on_affine_space() {
    let (code, report) = json_report(&["ext", "--example", "affine", "--dims", "2", "2"]);
    assert_eq!(code, 0);
    assert_eq!(report["checks"][0]["data"]["split"], true);
}

#[test]
fn conic_demo_writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("superbv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("conic.txt");
    let out = superbv(&["conic-demo", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("PASS conic.h0"));
    assert!(!text.contains("FAIL"));
    std::fs::remove_dir_all(&dir).unwrap();
}
