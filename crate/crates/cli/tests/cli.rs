use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn srr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srr")).args(args).output().expect("spawn srr")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn nq_binary_example() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", "[[1,1],[2,0]]");
    let v = json(&srr(&["nq", "--q", "2", "--demands", s(&d)]));
    assert_eq!(v["n_q"], 3);
    assert_eq!(v["k"], 2);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 3);
}

#[test]
fn bounds_example() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"[["2.5","1"],["1","2"]]"#);
    let v = json(&srr(&["bounds", "--demands", s(&d)]));
    assert_eq!(v["alpha"], 4);
    assert_eq!(v["beta"], 5);
    assert_eq!(v["nonexistence_at_alpha"], true);
}

#[test]
fn qn_reports_nonexistence() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", "[[2,1],[1,2]]");
    let v = json(&srr(&["qn", "--n", "3", "--demands", s(&d)]));
    assert_eq!(v["status"], "nonexistent");
    assert_eq!(v["reason"], "alpha");
    let v = json(&srr(&["qn", "--n", "4", "--demands", s(&d)]));
    assert_eq!(v["status"], "found");
}

#[test]
fn nq_certificate_round_trips_through_membership() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"[["2.5","1"],["1","2"]]"#);
    let cert = dir.path().join("nq.json");
    let out = srr(&["nq", "--q", "4", "--demands", s(&d), "--out", s(&cert)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v = json(&srr(&["membership", "--matrix", s(&cert), "--demands", s(&cert)]));
    assert_eq!(v["all_supported"], true);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["verified"], true);
    }
}

#[test]
fn membership_rejects_with_certificate() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"field": 2, "matrix": [[1,0],[0,1],[1,1]]}"#);
    let d = write(&dir, "d.json", "[[1,1],[3,0]]");
    let v = json(&srr(&["membership", "--matrix", s(&m), "--demands", s(&d)]));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results[0]["supported"], true);
    assert_eq!(results[1]["supported"], false);
    assert!(results[1].get("certificate").is_some());
    assert_eq!(results[1]["verified"], true);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"[["2.5","1"],["1","2"]]"#);
    let args = ["nq", "--q", "4", "--demands", s(&d)];
    let a = srr(&args);
    let b = srr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = srr(&["nq", "--q", "4", "--demands", s(&d), "--jobs", "1"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn region_writes_csv() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", "[[1,0],[0,1],[1,1]]");
    let out = srr(&["region", "--q", "2", "--matrix", s(&m), "--resolution", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dir_1,dir_2,t_max"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn recovery_lists_sets() {
    let v = json(&srr(&["recovery", "--q", "2", "--k", "2"]));
    assert_eq!(v["sets"]["1"].as_array().unwrap().len(), 2);
    assert_eq!(v["sets"]["2"].as_array().unwrap().len(), 2);
}

#[test]
fn reduce_drops_interior_points() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", "[[2,0],[0,2],[1,1],[0,0]]");
    let v = json(&srr(&["reduce", "--demands", s(&d)]));
    assert_eq!(v["removed"], 1);
    assert_eq!(v["demands"], serde_json::json!([["2", "0"], ["0", "2"], ["0", "0"]]));
}

#[test]
fn oracle_agrees_with_solver() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", "[[2,1],[1,2]]");
    let v = json(&srr(&["oracle", "--q", "3", "--demands", s(&d)]));
    assert_eq!(v["n_q"], 4);
    let v = json(&srr(&["nq", "--q", "3", "--demands", s(&d)]));
    assert_eq!(v["n_q"], 4);
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", "[[1,1],[2,0]]");
    assert_eq!(srr(&["nq", "--q", "6", "--demands", s(&d)]).status.code(), Some(2));
    assert_eq!(srr(&["nq", "--demands", s(&d)]).status.code(), Some(2));
    let bad = write(&dir, "bad.json", "[[1,-1]]");
    assert_eq!(srr(&["nq", "--q", "2", "--demands", s(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(srr(&["bounds", "--demands", s(&missing)]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_srr"))
        .args(["recovery", "--q", "3", "--k", "3"])
        .env("SRR_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
