//! End-to-end checks of the `adaptivity` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adaptivity"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn valid_config(output: &Path) -> String {
    format!(
        r#"{{"schema_version": 1, "algo": "BatchLinUCB-KW",
            "env": {{"kind": "stochastic", "spec": {{"kind": "uniform_sphere"}}}},
            "d": 3, "K": 5, "T": 300, "delta": 0.05, "seeds": [1, 2], "output": {:?}}}"#,
        output.display().to_string()
    )
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(dir.path(), &valid_config(&out_dir));
    let out = run(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["n"], 2);
    assert_eq!(summary["algo"], "BatchLinUCB-KW");
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 601);
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn missing_field_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let body = valid_config(dir.path()).replace(r#""delta": 0.05, "#, "");
    let cfg = write_config(dir.path(), &body);
    let out = run(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("delta"), "{err}");
}

#[test]
fn invalid_value_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = valid_config(dir.path()).replace(r#""T": 300"#, r#""T": 2"#);
    let out = run(&["run", &write_config(dir.path(), &body)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn design_on_basis_sets_is_uniform() {
    let out = run(&["design", &data("basis.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let designs = v["designs"].as_array().unwrap();
    assert_eq!(designs.len(), 2);
    for (design, d) in designs.iter().zip([3.0, 2.0]) {
        let w: Vec<f64> = design["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((design["max_variance"].as_f64().unwrap() - d).abs() < 1e-6);
    }
}

#[test]
fn mixed_design_needs_lambda() {
    let out = run(&["design", &data("basis.json"), "--flavor", "softmax"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda"));
}

#[test]
fn lbgen_emits_full_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lb.json");
    std::fs::write(&path, r#"{"schema_version": 1, "d": 2, "T": 100000, "M": 10}"#).unwrap();
    let out = run(&["lbgen", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let stages = v["L"].as_u64().unwrap() as usize;
    let schedule = v["schedule"].as_array().unwrap();
    assert_eq!(schedule.len(), stages);
    assert_eq!(schedule[0]["first_step"], 1);
    assert_eq!(schedule.last().unwrap()["last_step"], 100000);
    for pair in schedule.windows(2) {
        assert_eq!(pair[0]["last_step"].as_u64().unwrap() + 1, pair[1]["first_step"].as_u64().unwrap());
    }
}

#[test]
fn summarize_rebuilds_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(dir.path(), &valid_config(&out_dir));
    let first = stdout_json(&run(&["run", &cfg]));
    let pattern = format!("{}/*.csv", out_dir.display());
    let out = run(&["summarize", &pattern]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rebuilt = stdout_json(&out);
    assert_eq!(rebuilt[0]["mean_regret"], first["mean_regret"]);
    assert_eq!(rebuilt[0]["n"], 2);
}

#[test]
fn summarize_without_matches_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["summarize", &format!("{}/*.csv", dir.path().display())]);
    assert_eq!(out.status.code(), Some(2));
}
