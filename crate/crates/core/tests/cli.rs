use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcmrank::experiment::ExperimentConfig;
use serde_json::{json, Value};
use tempfile::TempDir;

fn dcmrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcmrank")).current_dir(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut value = serde_json::to_value(ExperimentConfig::default()).unwrap();
    edit(&mut value);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

/// Runs generate, graph, rank, couple and wbp in `dir/out` and returns the
/// contents of every file written, by name.
fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let steps: [&[&str]; 5] = [
        &["--seed", "5", "--out", "out", "generate", "--n", "300"],
        &["--seed", "5", "--out", "out", "graph", "--sequence", "out/sequence.csv"],
        &["--seed", "5", "--out", "out", "rank", "--sequence", "out/sequence.csv", "--edges", "out/edges.csv"],
        &["--seed", "5", "--out", "out", "couple", "--sequence", "out/sequence.csv", "--depth", "3"],
        &["--seed", "5", "--out", "out", "wbp", "--samples", "200", "--generations", "6"],
    ];
    for args in steps {
        let out = dcmrank(dir, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn pipeline_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    let names: Vec<&str> = first.iter().map(|f| f.0.as_str()).collect();
    for expected in ["sequence.csv", "edges.csv", "wbp_samples.csv"] {
        assert!(names.contains(&expected), "missing {expected} in {names:?}");
    }
    assert!(names.iter().all(|n| !n.ends_with(".partial")));
    assert_eq!(first, second);
}

#[test]
fn invalid_alpha_exits_with_config_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), |v| v["model"]["alpha"] = json!(0.5));
    let config = config.to_str().unwrap();
    for args in [
        &["--config", config, "--out", "out", "generate", "--n", "10"][..],
        &["--config", config, "--out", "out", "experiment"][..],
    ] {
        let out = dcmrank(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn missing_input_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = dcmrank(dir.path(), &["--out", "out", "graph", "--sequence", "nope.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn smoke_experiment_reports_four_batches() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), |v| {
        v["n_values"] = json!([10]);
        v["replications"] = json!(2);
    });
    let out = dcmrank(dir.path(), &["--config", config.to_str().unwrap(), "--out", "out", "experiment"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("out/report.json"));
    let size = &report["sizes"][0];
    assert_eq!(size["n"], 10);
    let batches = size["batches"].as_object().unwrap();
    assert_eq!(batches.len(), 4);
    for (name, b) in batches {
        assert_eq!(b["count"], 2, "batch {name}");
    }
    let csv = fs::read_to_string(dir.path().join("out/batches_n10.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv.lines().next().unwrap(), "replication,R_inf,R_kn,R_hat,R_star");
}

#[test]
fn exceeding_the_failure_budget_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), |v| {
        v["n_values"] = json!([100]);
        v["replications"] = json!(20);
        v["tree_node_cap"] = json!(2);
    });
    let out = dcmrank(dir.path(), &["--config", config.to_str().unwrap(), "--out", "out", "experiment"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn tailcheck_with_no_offspring_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), |v| {
        v["tail"]["count_law"] = json!({ "kind": "point_mass", "value": 0 });
        v["tail"]["samples"] = json!(1000);
    });
    let out = dcmrank(dir.path(), &["--config", config.to_str().unwrap(), "--out", "out", "tailcheck"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("out/tail_report.json"));
    assert_eq!(report["degenerate"], true);
    assert!(report["hill_index"].is_null());
}
