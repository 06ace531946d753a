//! Black-box tests of the `invopt` binary: exit codes, report contents,
//! iteration streaming, and batch determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_invopt"))
}

fn ex1_json() -> &'static str {
    r#"{
  "format": 1,
  "problem": {
    "name": "ex1",
    "num_vars": 2,
    "constraints": [
      { "coeffs": [-4, -3], "rel": "<=", "rhs": -19 },
      { "coeffs": [-1, -3], "rel": "<=", "rhs": -8 },
      { "coeffs": [6, 1], "rel": "<=", "rhs": 30 },
      { "coeffs": [-3, 5], "rel": "<=", "rhs": 17 }
    ],
    "integrality": [true, true]
  },
  "observation": [4, 2],
  "reference_cost": [3, 1]
}"#
}

fn write_ex1(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, ex1_json()).unwrap();
    path
}

fn parsed_stdout(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON report")
}

#[test]
fn solve_biobjective_unit_matches_the_golden_values() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_ex1(dir.path(), "ex1.json");
    let out = bin()
        .args(["solve", inst.to_str().unwrap(), "--model", "biobj", "--weights", "unit"])
        .output()
        .unwrap();
    let report = parsed_stdout(&out);
    assert_eq!(report["model"], "biobjective");
    assert!((report["l1_deviation"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-8);
    assert!((report["eps_total"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((report["forward"]["upper_bound"].as_f64().unwrap() - 20.0 / 3.0).abs() < 1e-8);
}

#[test]
fn solve_tolerance_with_explicit_tau() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_ex1(dir.path(), "ex1.json");
    let out = bin()
        .args(["solve", inst.to_str().unwrap(), "--model", "tolerance", "--tau", "1e-3", "--scale"])
        .output()
        .unwrap();
    let report = parsed_stdout(&out);
    let l1 = report["l1_deviation"].as_f64().unwrap();
    assert!((l1 - 3.99).abs() < 0.05, "l1 {l1}");
    let scaled = &report["scaled"];
    assert!((scaled["c_hat"][0].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert!((scaled["c_hat"][1].as_f64().unwrap() - 2.25).abs() < 1e-6);
    assert!((scaled["l1_deviation"].as_f64().unwrap() - 1.25).abs() < 1e-6);
}

#[test]
fn malformed_json_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    let out = bin().args(["solve", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn infeasible_observation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, ex1_json().replace("[4, 2]", "[0, 0]")).unwrap();
    let out = bin().args(["solve", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cutplane_converges_and_streams_records() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_ex1(dir.path(), "ex1.json");
    let out = bin().args(["cutplane", inst.to_str().unwrap()]).output().unwrap();
    let report = parsed_stdout(&out);
    assert_eq!(report["cutplane"]["status"], "converged");
    let norm = report["l1_deviation"].as_f64().unwrap();
    assert!((norm - 2.0).abs() < 1e-8, "norm {norm}");
    // One NDJSON record per log entry on stderr.
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().filter(|l| l.starts_with('{')).collect();
    assert_eq!(lines.len(), report["cutplane"]["log"].as_array().unwrap().len());
    for line in lines {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["k"].is_number());
    }
}

#[test]
fn verify_reports_oracle_and_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_ex1(dir.path(), "ex1.json");
    let cost = dir.path().join("cost.json");
    fs::write(&cost, "[1, 1]").unwrap();
    let out = bin()
        .args(["verify", inst.to_str().unwrap(), "--cost", cost.to_str().unwrap()])
        .output()
        .unwrap();
    let report = parsed_stdout(&out);
    assert_eq!(report["optimal_at_e2"], true);
    assert_eq!(report["optimal_at_e5"], true);
    assert_eq!(report["oracle"]["optimal"], true);

    // A cost with a known gap: (4/3, 1) leaves x̂ suboptimal by 2/3,
    // rgap = (2/3)/(22/3) = 1/11.
    fs::write(&cost, "[1.3333333333333333, 1]").unwrap();
    let out = bin()
        .args(["verify", inst.to_str().unwrap(), "--cost", cost.to_str().unwrap()])
        .output()
        .unwrap();
    let report = parsed_stdout(&out);
    assert!((report["rgap"].as_f64().unwrap() - 1.0 / 11.0).abs() < 1e-9);
    assert_eq!(report["optimal_at_e2"], false);
}

#[test]
fn batch_runs_are_deterministic_across_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    write_ex1(dir.path(), "a.json");
    fs::write(dir.path().join("b.json"), ex1_json().replace("[4, 2]", "[3, 3]")).unwrap();
    fs::write(dir.path().join("c.json"), ex1_json().replace("[4, 2]", "[4, 4]")).unwrap();

    let run = |n: &str| -> (String, String) {
        let md = dir.path().join(format!("table-{n}.md"));
        let csv = dir.path().join(format!("table-{n}.csv"));
        let out = bin()
            .args([
                "batch",
                dir.path().to_str().unwrap(),
                "--model",
                "biobj",
                "--parallel",
                n,
                "--no-timing",
                "--md",
                md.to_str().unwrap(),
                "--csv",
                csv.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        (fs::read_to_string(&md).unwrap(), fs::read_to_string(&csv).unwrap())
    };
    let (md1, csv1) = run("1");
    let (md4, csv4) = run("4");
    assert_eq!(md1, md4);
    assert_eq!(csv1, csv4);
    // Three instances, one row each (no shared group key).
    assert_eq!(csv1.lines().count(), 4);
}

#[test]
fn batch_on_empty_dir_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["batch", dir.path().to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn batch_with_a_failing_instance_exits_1_and_lists_it() {
    let dir = tempfile::tempdir().unwrap();
    write_ex1(dir.path(), "good.json");
    fs::write(dir.path().join("bad.json"), "{").unwrap();
    let out = bin()
        .args(["batch", dir.path().to_str().unwrap(), "--model", "biobj"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json"));
}

#[test]
fn reports_are_bit_for_bit_reproducible_with_no_timing() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_ex1(dir.path(), "ex1.json");
    let run = || {
        bin()
            .args([
                "solve",
                inst.to_str().unwrap(),
                "--model",
                "biobj",
                "--weights",
                "unit",
                "--no-timing",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn schema_roundtrip_parse_emit_parse() {
    let parsed = invopt_cli::instance::parse_instance(ex1_json()).unwrap();
    let loaded = parsed.load().unwrap();
    assert_eq!(loaded.name, "ex1");
    // The shipped schema file documents the same format version.
    let schema: serde_json::Value = serde_json::from_str(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/instance.schema.json"
    )))
    .unwrap();
    assert_eq!(schema["properties"]["format"]["const"], 1);
}
