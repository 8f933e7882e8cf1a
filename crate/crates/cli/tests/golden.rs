use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffeo-reps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares stdout with the stored report; `UPDATE_GOLDEN=1` rewrites it.
fn assert_golden(name: &str, args: &[&str]) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected, "report for {args:?} changed");
}

#[test]
fn golden_minimal_k() {
    assert_golden("minimal_k.json", &["minimal-k", "--f", "bump(0.5, 1) * z", "--n", "1", "--res", "33"]);
}

#[test]
fn golden_translate_sympl() {
    assert_golden("translate_sympl.json", &["translate-sympl", "--seed", "3"]);
}

#[test]
fn golden_conv_euclid() {
    assert_golden("conv_euclid.json", &["conv-euclid", "--res", "17", "--seed", "5"]);
}

#[test]
fn golden_shrink_demo_csv() {
    assert_golden("shrink_demo.csv", &["shrink-demo", "--res", "17", "--format", "csv"]);
}

#[test]
fn minimal_k_of_z_odd_bump_is_one() {
    let out = run(&["minimal-k", "--f", "bump(0.5, 1) * z", "--n", "1", "--res", "33"]);
    let report = json(&out);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["results"]["k"], 1);
    assert_eq!(report["results"]["oracle_k"], 1);
}

#[test]
fn symplectic_witness_is_found_and_deterministic() {
    let args = ["witness-sympl", "--n", "1", "--res", "65", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    assert_eq!(report["results"]["witness"]["passed"], true);
    assert_eq!(report["passed"], true);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn failed_check_exits_with_two() {
    let out = run(&["translate-sympl", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["no-such-command"][..],
        &["minimal-k", "--res", "5"],
        &["minimal-k", "--f", "x1 +* y1"],
        &["minimal-k", "--f", "w"],
        &["conv-euclid", "--tol", "-1"],
        &["conv-heis", "--n", "9"],
        &["witness-sympl", "--res", "many"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn report_is_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["translate-cont", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["subcommand"], "translate-cont");
    assert!(report["checks"]["right_translation_on_v"]["measured"].as_f64().unwrap() < 1e-6);
}

#[test]
fn unwritable_out_path_exits_with_one() {
    let out = run(&["translate-sympl", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(out.status.code(), Some(1));
}
