use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn regtower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regtower"))
        .args(args)
        .env_remove("REGTOWER_BUDGET")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn relative_strength_prints_certificate() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "x1*x2 + x3*x4\n");
    let i = write(&dir, "i.txt", "x1\n");
    let o = regtower(&[
        "--field",
        "Fp:5",
        "strength",
        f.to_str().unwrap(),
        "--mod",
        i.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("exact 1\n"), "{out}");
    assert!(out.contains("(x3) * (x4)"), "{out}");
}

#[test]
fn regularize_single_product() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "x1*x2\n");
    let out_path = dir.path().join("tower.txt");
    let o = regtower(&[
        "--field",
        "Fp:3",
        "regularize",
        f.to_str().unwrap(),
        "--C",
        "1",
        "--D",
        "1",
        "--r",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let tower = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(tower, "vars 2\nlayer 1\nx1\n");
}

#[test]
fn taylor_suite_passes_for_fixed_seed() {
    let o = regtower(&["--seed", "7", "verify", "--suite", "taylor", "--count", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn parse_errors_report_position_and_exit_3() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "x1*x2\nx1*+x2\n");
    let o = regtower(&["strength", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2, column 4"), "{err}");
}

#[test]
fn failing_audit_exits_1() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.txt", "dims 2,2\nlayer\nsupport {1,2}\n(1,1)=1\n(2,2)=1\n");
    let o = regtower(&[
        "--field",
        "Fp:2",
        "audit",
        t.to_str().unwrap(),
        "--multilinear",
        "--r",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = regtower(&[
        "--field",
        "Fp:2",
        "audit",
        t.to_str().unwrap(),
        "--multilinear",
        "--r",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exhausted_budget_exits_2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "x1*x2*x3 + x4*x5*x6 + x7*x8*x9 + x1*x5*x9\n");
    let o = regtower(&["--field", "Fp:3", "--budget", "10", "strength", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn unknown_field_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "x1*x2\n");
    let o = regtower(&["--field", "Fp:4", "strength", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_bounds_report_parses() {
    let o = regtower(&[
        "--format", "json", "bounds", "--d", "3", "--s", "1", "--assign", "C_reg=2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], 3);
    assert!(v["steps"].as_array().unwrap().iter().any(|s| s["step"] == "tower_size"));
}

#[test]
fn collections_compare() {
    let o = regtower(&["compare-collections", "{{1}}", "{{1},{1,2}}", "--d", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "less\n");
}
