use std::fs;
use std::process::Command;

use graphhop_cli::report::{Aggregate, RunReport};

fn graphhop(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_graphhop")).args(args).env_remove("GRAPHHOP_SEED").output().expect("spawn")
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o").display().to_string();
    assert_eq!(graphhop(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(graphhop(&["--help"]).status.code(), Some(0));
    let missing = dir.path().join("missing.jsonl").display().to_string();
    assert_eq!(graphhop(&["run", "--dataset", &missing, "--method", "bgr", "--out", &out]).status.code(), Some(2));
    assert_eq!(graphhop(&["run", "--dataset", &missing, "--method", "nope", "--out", &out]).status.code(), Some(1));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[run]\ngamma = 3.0\n").unwrap();
    let bad = bad.display().to_string();
    assert_eq!(graphhop(&["--config", &bad, "generate", "--out", &out]).status.code(), Some(1));
}

#[test]
fn report_aggregate_matches_its_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = |s: &str| dir.path().join(s).display().to_string();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[generate]\nn_instances = 40\n\n[run]\nscorer = \"bm25\"\n").unwrap();
    let cfg = cfg.display().to_string();
    assert!(graphhop(&["--config", &cfg, "generate", "--out", &o("data")]).status.success());
    let run = graphhop(&[
        "--config",
        &cfg,
        "run",
        "--dataset",
        &o("data/train.jsonl"),
        "--method",
        "bgr",
        "--out",
        &o("bgr"),
    ]);
    assert!(run.status.success());
    let report: RunReport = serde_json::from_str(&fs::read_to_string(o("bgr/run.json")).unwrap()).unwrap();
    assert_eq!(report.instances.len(), 32);
    assert_eq!(report.aggregate, Aggregate::of(&report.instances));
    let mean_f1 = report.instances.iter().map(|r| r.f1).sum::<f64>() / 32.0 * 100.0;
    assert!((report.aggregate.f1 - mean_f1).abs() < 1e-9);
    let table = fs::read_to_string(o("bgr/run.tsv")).unwrap();
    assert!(table.starts_with("method\tGM\tGS\tGED\tF1\tPrecision\tRecall\tEM\tQA-EM\n"));
    let predictions = fs::read_to_string(o("bgr/predictions.tsv")).unwrap();
    assert_eq!(predictions.lines().count(), 32);
}
