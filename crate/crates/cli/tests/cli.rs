use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cbs");

fn cbs(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn cbs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) => s.parse().unwrap(),
        v => v.as_f64().unwrap(),
    }
}

const SINGLE: &str = r#"{"schema_version":"1","dim":2,"weights":[[0.5,-1.5]],
  "operators":[[[[1,2],[0,-1]],[[3,0],[0.25,0.5]]]]}"#;

#[test]
fn single_operator_report_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.json", SINGLE);
    let out = cbs(&["bound", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let lhs = num(&r["lhs"]);
    let bounds = r["bounds"].as_array().unwrap();
    // no cross pairs, so the orthogonal entries are included
    assert_eq!(bounds.len(), 68);
    for b in bounds {
        assert!((num(&b["value"]) - lhs).abs() <= 1e-9 * lhs, "{b}");
        assert!((num(&b["slack_ratio"]) - 1.0).abs() <= 1e-9);
    }
    assert_eq!(r["input"]["mode"], "operators");
    assert_eq!(r["all_hold"], true);
}

#[test]
fn orthonormal_vectors_with_unit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "v.json",
        r#"{"schema_version":"1","dim":3,"weights":[[1,0],[1,0],[1,0]],
            "vectors":[[[1,0],[0,0],[0,0]],[[0,0],[0,1],[0,0]],[[0,0],[0,0],[-1,0]]]}"#,
    );
    let out = cbs(&["bound", "--input", input.to_str().unwrap(), "--mode", "vectors"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    // Gram = I: the all-pairs max-weight bound is n per unit probe, the exact value is 1
    let all_pairs = r["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["name"] == "max_weight_all_pairs")
        .unwrap();
    assert_eq!(num(&all_pairs["value"]), 3.0);
    assert_eq!(num(&r["lhs"]), 1.0);
    assert!(r["bounds"].as_array().unwrap().iter().any(|b| b["name"] == "orthogonal[max_weight]"));
    // zero cross terms leave only the diagonal sum, so nothing beats n
    assert!((num(&r["tightest"]["value"]) - 3.0).abs() <= 1e-12);
}

#[test]
fn vectors_mode_without_weights_is_labelled_bessel() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "v.json",
        r#"{"schema_version":"1","dim":2,"vectors":[[[1,0],[1,0]],[[0,2],[1,-1]]]}"#,
    );
    let out = cbs(&["bound", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["input"]["weights"], "bessel");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.json", SINGLE);
    let args = ["bound", "--input", input.to_str().unwrap(), "--grid", "1.5,3"];
    let a = cbs(&args);
    let b = cbs(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn verify_examples() {
    let out = cbs(&["verify", "--kind", "orthonormal-rank-one", "--dim", "3", "--count", "3", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["all_hold"], true);

    let out = cbs(&["verify", "--kind", "gaussian-dense", "--dim", "4", "--count", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["all_hold"], true);
    assert_eq!(r["input"]["spec"]["seed"], 1);

    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.json", SINGLE);
    let out = cbs(&["verify", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let corrupt = write(dir.path(), "bad.json", "{\"schema_version\": \"1\", \"dim\": ");
    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"schema_version":"1","dim":2,"vectors":[[[0,0],[0,0]]]}"#,
    );
    let single = write(dir.path(), "p.json", SINGLE);
    let cases: Vec<Vec<&str>> = vec![
        vec!["bound", "--input", corrupt.to_str().unwrap()],
        vec!["bound", "--input", "/nonexistent/problem.json"],
        vec!["bound", "--input", zero.to_str().unwrap()],
        vec!["bound", "--input", single.to_str().unwrap(), "--mode", "vectors"],
        vec!["bound", "--input", single.to_str().unwrap(), "--grid", "0.5"],
        vec!["bound", "--input", single.to_str().unwrap(), "--tol", "-1"],
        vec!["bound", "--input", single.to_str().unwrap(), "--out", "/nonexistent/dir/r.json"],
        vec!["verify", "--kind", "gaussian-dense", "--dim", "3"],
        vec!["verify", "--kind", "block-orthogonal", "--dim", "2", "--count", "3"],
        vec!["verify", "--kind", "no-such-kind", "--dim", "2", "--count", "3"],
        vec!["sweep", "--kind", "gaussian-dense", "--dim", "0", "--count", "1"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = cbs(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn sweep_single_operator_rows_are_tight() {
    let out = cbs(&["sweep", "--kind", "unitary-scaled", "--dim", "3", "--count", "1", "--instances", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "seed,kind,dim,count,bound,exponents,lhs,bound_value,slack_ratio");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 68);
    for row in rows {
        let slack: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((slack - 1.0).abs() <= 1e-9, "{row}");
    }
}

#[test]
fn sweep_of_100_seeds_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = cbs(&[
            "sweep", "--kind", "gaussian-dense", "--dim", "4", "--count", "3", "--seed", "1", "--instances", "100",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 100 * 61);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn empty_sweep_is_header_only() {
    let out = cbs(&["sweep", "--kind", "gaussian-dense", "--dim", "2", "--count", "2", "--instances", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "seed,kind,dim,count,bound,exponents,lhs,bound_value,slack_ratio\n"
    );
}
