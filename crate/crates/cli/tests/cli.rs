//! End-to-end runs of the `kdt` binary on small scenes.

use std::path::Path;
use std::process::{Command, Output};

use kdt_core::{generate_scene, MotionFamily};
use serde_json::Value;

fn kdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdt")).args(args).output().expect("binary runs")
}

fn write_scene(dir: &Path, n: usize, seed: u64) -> String {
    let scene = generate_scene(MotionFamily::GenericLinear, n, seed, None).unwrap();
    let path = dir.join(format!("scene_{n}_{seed}.json"));
    std::fs::write(&path, scene.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn json_lines(out: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn verify_with_oracle_prints_log_and_passing_summary() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 8, 3);
    let out = kdt(&["verify", "--scene", &scene, "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out.stdout);
    let summary = lines.last().unwrap();
    let events = summary["counters"]["log_events"].as_u64().unwrap() as usize;
    assert_eq!(lines.len(), events + 1);
    assert_eq!(summary["checks"]["log_matches_census"], Value::Bool(true));
    for rec in summary["crossings"].as_array().unwrap() {
        for key in ["p", "q", "r", "t0", "t1", "hits", "kind", "degenerate"] {
            assert!(rec.get(key).is_some(), "missing {key}");
        }
        let checks = &rec["lemma_checks"];
        for key in ["crossing", "once_collin", "order", "nesting"] {
            assert_eq!(checks[key], Value::Bool(true));
        }
    }
}

#[test]
fn verify_can_write_log_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 7, 1);
    let log = dir.path().join("events.jsonl");
    let out = kdt(&["verify", "--scene", &scene, "--log", log.to_str().unwrap()]);
    assert!(out.status.success());
    let counters = &json_lines(&out.stdout)[0];
    let logged = std::fs::read_to_string(&log).unwrap();
    assert_eq!(logged.lines().count() as u64, counters["log_events"].as_u64().unwrap());
    let first: Value = serde_json::from_str(logged.lines().next().unwrap()).unwrap();
    assert!(first["t_lo"].as_str().unwrap().contains('/'));
}

#[test]
fn census_lines_carry_level_and_segment_flag() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 6, 2);
    let out = kdt(&["census", "--scene", &scene]);
    assert!(out.status.success());
    let lines = json_lines(&out.stdout);
    assert!(!lines.is_empty());
    for l in &lines {
        assert!(l["level"].is_u64());
        assert!(l["on_segment"].is_boolean());
    }
}

#[test]
fn trichotomy_reports_an_outcome_and_dumps_slice() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 8, 5);
    // pick an edge that is Delaunay at t = 0
    let parsed = kdt_core::Scene::from_json(&std::fs::read_to_string(&scene).unwrap()).unwrap();
    let t0 = num_zero();
    let edges = kdt_core::oracle::static_delaunay(&parsed, &t0).unwrap();
    let (p, q) = edges[0];
    let slice = dir.path().join("slice.json");
    let edge = format!("{p},{q}");
    let out = kdt(&[
        "trichotomy", "--scene", &scene, "--edge", &edge, "--t0", "0", "--t1", "1/2", "--k", "13",
        "--slice", slice.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.get("outcome").is_some());
    let dumped: Value = serde_json::from_str(&std::fs::read_to_string(slice).unwrap()).unwrap();
    assert!(dumped.is_object());
}

fn num_zero() -> kdt_core::Time {
    kdt_core::motion::rational_serde::parse("0").unwrap()
}

#[test]
fn sample_reports_survival_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), 16, 3);
    let out = kdt(&["sample", "--scene", &scene, "--k", "2", "--trials", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.is_object());
}

#[test]
fn run_writes_batch_artifacts_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = serde_json::json!({
        "family": "GENERIC_LINEAR",
        "n_values": [6, 8, 10],
        "seeds": 2,
        "base_seed": 11,
        "output_dir": out_dir,
    });
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config.to_string()).unwrap();
    let out = kdt(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    for f in ["batch.json", "runs.csv", "growth.csv", "growth.svg", "growth_plot.csv"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
}

#[test]
fn bad_input_exits_with_error() {
    let out = kdt(&["census", "--scene", "/nonexistent/scene.json"]);
    assert!(!out.status.success());
    let out = kdt(&["trichotomy", "--scene", "x", "--edge", "1", "--t0", "0", "--t1", "1"]);
    assert!(!out.status.success());
}
