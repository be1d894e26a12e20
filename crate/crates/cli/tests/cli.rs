use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const A2: &str = r#"{"alphabet_size": 2, "depth": 2, "values": {"00": "-1", "01": "0", "10": "0", "11": "-1"}}"#;
const CONSTANT: &str = r#"{"alphabet_size": 2, "depth": 2, "values": {"00": "0", "01": "0", "10": "0", "11": "0"}}"#;
const DEPTH_ONE: &str = r#"{"alphabet_size": 2, "depth": 1, "values": {"0": "0", "1": "-1"}}"#;

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergotwist")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn analyze_canonical_example() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "a2.json", A2);
    let out = dir.path().join("out");
    let o = run(&["analyze", &file, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    for needle in ["m(A) = 0", "gamma = 1", "distinct optimal w: 2", "0(1)|1(0)", "transport cost -1/2"] {
        assert!(s.contains(needle), "missing {needle:?} in\n{s}");
    }
    let json: serde_json::Value = serde_json::from_str(&read(&out, "report.json")).unwrap();
    assert_eq!(json["gamma"], "1");
    assert_eq!(json["transport"]["cost"], "-1/2");
    assert_eq!(read(&out, "kernel.csv"), "w\\x,0,1\n0,0,1\n1,0,-1\n");
    assert_eq!(read(&out, "summary.txt"), s);
    assert!(out.join("b_table.csv").exists() && out.join("plan.csv").exists());
}

#[test]
fn analyze_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "a2.json", A2);
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    run(&["analyze", &file, "--out", o1.to_str().unwrap()]);
    run(&["analyze", &file, "--out", o2.to_str().unwrap()]);
    for name in ["report.json", "summary.txt", "kernel.csv", "b_table.csv", "plan.csv"] {
        assert_eq!(read(&o1, name), read(&o2, name), "{name}");
    }
}

#[test]
fn analyze_constant_potential_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze", &write(&dir, "c.json", CONSTANT)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not unique"));
}

#[test]
fn malformed_input_exits_with_parse_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["analyze", &write(&dir, "bad.json", "{not json")]).status.code(), Some(2));
    let missing = write(&dir, "short.json", r#"{"alphabet_size": 2, "depth": 2, "values": {"00": "1"}}"#);
    assert_eq!(run(&["analyze", &missing]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", &write(&dir, "a2.json", A2), "--base-point", "(2)"]).status.code(), Some(2));
}

#[test]
fn scan_ladder_and_single_beta() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "a2.json", A2);
    let o = run(&["scan", &file, "--betas", "1,2,4,8,16,32,64"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines[0].ends_with(",ldp_gap"));
    let gaps: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");

    let single = run(&["scan", &file, "--beta", "3"]);
    assert_eq!(stdout(&single).lines().count(), 2);
    assert_eq!(run(&["scan", &file, "--betas", "4,2"]).status.code(), Some(2));
}

#[test]
fn scan_non_unique_potential_omits_ldp_column() {
    let dir = TempDir::new().unwrap();
    let o = run(&["scan", &write(&dir, "c.json", CONSTANT), "--betas", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).lines().next().unwrap().contains("ldp"));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "a2.json", A2);
    let ok = run(&["verify", &file]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(!stdout(&ok).contains("FAIL"));

    let bad = run(&["verify", &file, "--corrupt-w"]);
    assert_eq!(bad.status.code(), Some(4));
    let s = stdout(&bad);
    let fr = s.lines().find(|l| l.contains("FR")).unwrap();
    assert!(fr.starts_with("FAIL") && fr.contains("x=") && fr.contains("w="), "{fr}");
}

#[test]
fn verify_depth_one_passes_with_notes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["verify", &write(&dir, "d1.json", DEPTH_ONE)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("note:"));
}

#[test]
fn sample_reports_summary_and_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gen");
    let o = run(&["sample", "--seed", "3", "--samples", "12", "--depth", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("samples 12"));
    assert_eq!(read(&out, "generic.csv").lines().count(), 14);
}
