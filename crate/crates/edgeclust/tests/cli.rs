use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn edgeclust(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgeclust")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = edgeclust(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    edgeclust(dir, args).status.code().unwrap()
}

#[test]
fn stages_compose_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--kind", "crossbones", "--n", "120", "--seed", "1", "--out", "pool.csv"]);
    ok(d, &["gen", "--kind", "crossbones", "--n", "30", "--seed", "2", "--out", "hold.csv"]);
    ok(d, &["pairs", "--samples", "pool.csv", "--pairs", "1500", "--seed", "3", "--out", "pairs.csv"]);
    ok(d, &["fit", "--samples", "pool.csv", "--pair-file", "pairs.csv", "--pca", "0.95", "--out", "model.json"]);
    ok(d, &["graph", "--model", "model.json", "--samples", "hold.csv", "--labeled", "--out", "g.tsv"]);
    assert!(std::fs::read_to_string(d.join("g.tsv")).unwrap().starts_with("# n=30\n"));

    ok(d, &["cluster", "--graph", "g.tsv", "--out", "lp.json"]);
    ok(d, &["cluster", "--graph", "g.tsv", "--algo", "pivot", "--out", "pivot.json"]);
    let lp: Vec<usize> = serde_json::from_str(&std::fs::read_to_string(d.join("lp.json")).unwrap()).unwrap();
    assert_eq!(lp.len(), 30);

    let score: Value =
        serde_json::from_str(&ok(d, &["eval", "--samples", "hold.csv", "--partition", "lp.json"])).unwrap();
    let nmi = score["nmi"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&nmi));

    let cert: Value =
        serde_json::from_str(&ok(d, &["certify", "--graph", "g.tsv", "--partition", "pivot.json"])).unwrap();
    let lb = cert["lp_lower_bound"].as_f64().unwrap();
    assert!(lb <= cert["rounded_cost"].as_f64().unwrap() + 1e-6);
    assert!(lb <= cert["partition_cost"].as_f64().unwrap() + 1e-6);
    assert!(cert["max_triangle_violation"].as_f64().unwrap() <= 1e-6);

    ok(d, &["baseline", "--samples", "hold.csv", "--labeled", "--method", "kmeans", "--k", "2", "--out", "km.json"]);
    ok(d, &["plot", "--samples", "hold.csv", "--labeled", "--partition", "km.json", "--out", "km.svg"]);
    let svg = std::fs::read_to_string(d.join("km.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 30);
}

#[test]
fn pipeline_is_deterministic_across_processes_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = ["pipeline", "--holdout", "40", "--pairs", "1500", "--train-pool", "80", "--seed", "7"];
    let a = ok(d, &args);
    let b = String::from_utf8(
        Command::new(env!("CARGO_BIN_EXE_edgeclust"))
            .current_dir(d)
            .env("EDGECLUST_THREADS", "1")
            .args(args)
            .output()
            .unwrap()
            .stdout,
    )
    .unwrap();
    assert_eq!(a, b);
    let report: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["config"]["similarity"], "absdiff");
    assert_eq!(report["config"]["algo"], "lp");
    assert!(report["timing"].is_null());
    assert_eq!(report["labels"].as_array().unwrap().len(), 40);

    // the echoed config reproduces the run
    std::fs::write(d.join("cfg.json"), report["config"].to_string()).unwrap();
    assert_eq!(ok(d, &["pipeline", "--config", "cfg.json"]), a);

    let timed: Value = serde_json::from_str(&ok(d, &[&args[..], &["--timing", "--svg", "out.svg"]].concat())).unwrap();
    assert!(timed["timing"]["total"].as_f64().unwrap() > 0.0);
    assert!(std::fs::read_to_string(d.join("out.svg")).unwrap().contains("<circle"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(d, &["pipeline", "--algo", "oracle"]), 2);
    assert_eq!(code(d, &["pipeline", "--pca", "1.5"]), 2);
    assert_eq!(code(d, &["pipeline", "--sparsify=-1"]), 2);
    assert_eq!(code(d, &["pipeline", "--threads-typo"]), 2);
    assert_eq!(code(d, &["eval", "--samples", "missing.csv", "--partition", "p.json"]), 3);

    std::fs::write(d.join("ragged.csv"), "1,2,1\n3,1\n").unwrap();
    let out = edgeclust(d, &["pipeline", "--csv", "ragged.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    std::fs::write(d.join("g.tsv"), "# n=14\n0\t1\t1\t0.5\n").unwrap();
    assert_eq!(code(d, &["cluster", "--graph", "g.tsv", "--algo", "oracle"]), 2);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_edgeclust"))
        .current_dir(d)
        .env("EDGECLUST_THREADS", "zero")
        .args(["pipeline", "--holdout", "10"])
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn oracle_pipeline_on_small_edge_level_data() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = serde_json::json!({
        "data": {"source": "edge_level", "spec": {
            "sizes": [4, 4, 3],
            "p1": {"kind": "gaussian", "mean": [0.0], "std": [0.5]},
            "p0": {"kind": "gaussian", "mean": [4.0], "std": [0.5]}
        }},
        "seed": 3,
        "algo": "oracle",
        "pairs": 55
    });
    std::fs::write(d.join("cfg.json"), cfg.to_string()).unwrap();
    let report: Value = serde_json::from_str(&ok(d, &["pipeline", "--config", "cfg.json"])).unwrap();
    assert_eq!(report["n"], 11);
    assert_eq!(report["k_predicted"], 3);
    assert_eq!(report["structured"]["nmi"], 1.0);
    assert!(report["kmeans"].is_null());
}
