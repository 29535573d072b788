use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdpa::harness::{run_incremental, write_outputs};
use qdpa::io::{
    read_metrics_csv, write_metrics_csv, MetricsRow, ScenarioDocument, METRICS_COLUMNS,
};
use qdpa::RunConfig;
use qdpa_core::topology::build_scenario;
use qdpa_core::ScenarioConfig;

fn qdpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn small_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn shipped_config_equals_defaults() {
    let mut cfg = RunConfig::load(&default_config()).unwrap();
    cfg.output_dir = RunConfig::default().output_dir;
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn train_writes_every_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = qdpa(&[
        "train",
        "--config",
        default_config().to_str().unwrap(),
        "--seed",
        "3",
        "--frames",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows = read_metrics_csv(&out.join("metrics.csv")).unwrap();
    let ks: Vec<usize> = rows
        .iter()
        .filter(|r| r.method == "qdpa-il")
        .map(|r| r.k_active)
        .collect();
    assert_eq!(ks, (1..=10).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r.seed == 3));
    for f in [
        "powers.csv",
        "config.json",
        "summary.json",
        "qtables/seed3_fbs10_q.csv",
        "qtables/seed3_fbs1_visits.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    ScenarioDocument::load(&out.join("scenarios/seed3.json")).unwrap();
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        dir.path(),
        r#"{"seeds": [1, 2], "k_max": 4, "learning": {"training_frames": 300}}"#,
    );
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let res = qdpa(&[
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
        outputs.push(out);
    }
    for f in [
        "metrics.csv",
        "powers.csv",
        "summary.json",
        "qtables/seed2_fbs4_q.csv",
    ] {
        assert_eq!(
            std::fs::read(outputs[0].join(f)).unwrap(),
            std::fs::read(outputs[1].join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn metrics_round_trip_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        seeds: vec![0, 1],
        learning: qdpa_core::LearningConfig {
            training_frames: 100,
            ..Default::default()
        },
        baselines: qdpa::Baselines {
            greedy: false,
            ..Default::default()
        },
        ..RunConfig::default()
    };
    let out = run_incremental(&cfg).unwrap();
    write_outputs(&out, dir.path()).unwrap();
    let rows = read_metrics_csv(&dir.path().join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 20);
    let expected: Vec<MetricsRow> = out.records().iter().map(MetricsRow::from).collect();
    assert_eq!(rows, expected);
}

#[test]
fn empty_metrics_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_metrics_csv(&path, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.trim_end(), METRICS_COLUMNS.join(","));
    assert!(read_metrics_csv(&path).unwrap().is_empty());
}

#[test]
fn complexity_subcommand() {
    let res = qdpa(&[
        "complexity",
        "--rmax",
        "1",
        "--beta",
        "0.5",
        "--eps",
        "0.5",
        "--delta",
        "0.1",
        "--states",
        "2",
        "--actions",
        "2",
    ]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["min_iterations"], 561);
    assert_eq!(v["training_length"], 2244);
}

#[test]
fn oracle_budget_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("k8.json");
    ScenarioDocument::new(&build_scenario(&ScenarioConfig::default(), 8).unwrap())
        .save(&big)
        .unwrap();
    let res = qdpa(&["oracle", "--scenario", big.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("budget"));

    let small = dir.path().join("k2.json");
    ScenarioDocument::new(&build_scenario(&ScenarioConfig::default(), 2).unwrap())
        .save(&small)
        .unwrap();
    let res = qdpa(&["oracle", "--scenario", small.to_str().unwrap()]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["evaluated_count"], 121);
    assert_eq!(v["best_levels"].as_array().unwrap().len(), 2);
}

#[test]
fn reward_surface_subcommand() {
    let res = qdpa(&["reward-surface", "--kind", "quadratic", "--steps", "5"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r0,rk,reward");
    assert_eq!(lines.len(), 26);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qdpa(&["train"]).status.code(), Some(2));
    assert_eq!(
        qdpa(&["train", "--config", "x.json", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qdpa(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let res = qdpa(&[
        "train",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let cfg = small_config(dir.path(), r#"{"k_max": 50}"#);
    assert_eq!(
        qdpa(&["train", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_writes_rank_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        dir.path(),
        r#"{"seeds": [0, 1], "k_max": 3, "learning": {"training_frames": 200}}"#,
    );
    let out = dir.path().join("sweep");
    let res = qdpa(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let table = String::from_utf8(res.stdout).unwrap();
    for label in ["IL+x1", "CL+x1", "IL+x2", "CL+x2"] {
        assert!(table.contains(label));
        assert!(out.join(label).join("metrics.csv").exists());
    }
    assert!(out.join("comparison.csv").exists());
}

#[test]
fn identical_configurations_rank_identically() {
    let cfg = RunConfig {
        seeds: vec![0, 1],
        k_max: 3,
        learning: qdpa_core::LearningConfig {
            training_frames: 100,
            ..Default::default()
        },
        ..RunConfig::default()
    };
    let a = run_incremental(&cfg).unwrap();
    let b = run_incremental(&cfg).unwrap();
    let cmp = qdpa::harness::rank_outputs(&[("a".into(), a), ("b".into(), b)], 3);
    assert_eq!(cmp.ranks[0].fbs_sum_power, cmp.ranks[1].fbs_sum_power);
    assert_eq!(cmp.ranks[0].fue_sum_rate, cmp.ranks[1].fue_sum_rate);
    assert_eq!(cmp.ranks[0].mue_rate, cmp.ranks[1].mue_rate);
}
