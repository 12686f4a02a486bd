use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmitm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmitm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn knapsack_file_is_solved() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k.txt", "3 5\n1 2 3\n");
    let out = qmitm(&["solve", "knapsack", &f, "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"], "feasible");
    assert_eq!(r["witness"], serde_json::json!([0, 1, 1]));
    assert_eq!(r["verification"]["agrees"], true);
    assert!(r.get("wall_ms").is_none());
}

#[test]
fn infeasible_knapsack_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "k.txt", "3 3\n2 2 4\n");
    let out = qmitm(&["solve", "knapsack", &f, "--verify", "--retries", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["result"], "infeasible");
    assert!(r["note"].as_str().unwrap().contains("probabilistic"));
}

#[test]
fn malformed_dimacs_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.cnf", "p cnf 3\n1 2 0\n");
    let out = qmitm(&["solve", "cnf", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"].as_str().unwrap().contains("line 1"));
    let missing = qmitm(&["solve", "ilp", "/nonexistent/file"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn cnf_and_exact1_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.cnf", "c example\np cnf 3 2\n1 2 0\n2 3 0\n");
    let out = qmitm(&["solve", "cnf", &f, "--verify", "--c", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verification"]["brute_count"], 5);
    let out = qmitm(&["solve", "exact1", &f, "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verification"]["brute_count"], 2);
    let out = qmitm(&["solve", "cnf", &f, "--alpha-override", "0.5"]);
    assert_eq!(json(&out)["stats"]["k"], 2);
}

#[test]
fn ilp_file_with_equality_row() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "i.txt", "2 4\n1 1 1 1 = 2\n3 -1 2 1 <= 1\n");
    let out = qmitm(&["solve", "ilp", &f, "--verify", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["verification"]["agrees"], true);
    let x: Vec<i64> = r["witness"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()).collect();
    assert_eq!(x.iter().sum::<i64>(), 2);
    assert!(3 * x[0] - x[1] + 2 * x[2] + x[3] <= 1);
}

#[test]
fn generated_instances() {
    for kind in ["knapsack", "ilp", "cnf", "exact1", "symmetric-claw"] {
        let out = qmitm(&["solve", kind, "--generate", "12", "--seed", "2", "--verify"]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        assert_eq!(json(&out)["verification"]["agrees"], true, "{kind}");
    }
    let out = qmitm(&["solve", "claw", "--generate", "10", "--d", "2", "--seed", "1", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verification"]["brute_count"], 1);
    let out = qmitm(&["solve", "collision", "--generate", "8", "--subset-size", "8", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = qmitm(&["solve", "claw", "--generate", "8", "--no-plant", "--retries", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"], "unknown");
}

#[test]
fn solve_is_deterministic() {
    let args = ["solve", "cnf", "--generate", "14", "--c", "2", "--seed", "11"];
    let a = qmitm(&args);
    let b = qmitm(&args);
    assert_eq!(a.stdout, b.stdout);
    let timed = qmitm(&["solve", "ilp", "--generate", "12", "--timing"]);
    assert!(json(&timed).get("wall_ms").is_some());
}

#[test]
fn bench_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let prefix = dir.path().join(name).display().to_string();
        let out = qmitm(&["bench", "ilp", "--sizes", "12,15,18", "--trials", "20", "--seed", "5", "--out", &prefix]);
        assert_eq!(out.status.code(), Some(0));
        let csv = std::fs::read_to_string(format!("{prefix}.csv")).unwrap();
        let summary: Value = serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.json")).unwrap()).unwrap();
        (csv, summary)
    };
    let (a, summary) = run("a");
    let (b, _) = run("b");
    assert_eq!(a.lines().count(), 61);
    assert!(!a.lines().next().unwrap().contains("ms"));
    assert_eq!(a, b);
    assert!(summary["solver_fit"]["beta"].is_number());
    assert!(summary["baseline_fit"]["beta"].is_number());
}

#[test]
fn bench_claw_reports_exponent() {
    let out = qmitm(&["bench", "claw", "--sizes", "6,8,10", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["size_unit"], "log2 N");
    assert!(r["solver_fit"]["beta"].is_number());
    let single = qmitm(&["bench", "knapsack", "--sizes", "10", "--trials", "2"]);
    assert!(json(&single)["solver_fit"].is_null());
    assert_eq!(qmitm(&["bench", "nope", "--sizes", "10"]).status.code(), Some(2));
}

#[test]
fn validate_commands() {
    let out = qmitm(&["validate", "claw", "--n", "6", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["violations"], 0);
    let out = qmitm(&["validate", "claw", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qmitm(&["validate", "cnf-claim", "--n", "16", "--count", "500", "--c", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["instances"], 500);
    let out = qmitm(&["validate", "family", "--n", "8", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
}
