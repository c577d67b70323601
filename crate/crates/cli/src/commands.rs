//! File-level commands behind the `graphhop` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use graphhop_core::model::{read_dataset, write_dataset, QaInstance, QuestionType, StructureClass};
use graphhop_core::reconstruct::FuseMode;
use graphhop_core::synthgen::{generate, GenConfig, TripleStore};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{group_table, predictions, Aggregate, RunReport};
use crate::run::{run, sweep, Method};

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

pub fn load_dataset(path: &Path) -> Result<Vec<QaInstance>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(BufReader::new(file)).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Writes `train.jsonl`, `dev.jsonl`, `test.jsonl`, `report.json` and
/// `report.txt` into `out`.
pub fn cmd_generate(cfg: &GenConfig, triples: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate().map_err(CliError::usage)?;
    let store = match triples {
        None => TripleStore::bundled(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            TripleStore::from_tsv(&text).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?
        }
    };
    let ds = generate(&store, cfg).map_err(|e| match e {
        graphhop_core::synthgen::GenerateError::Config(c) => CliError::usage(c),
        other => CliError::data(other),
    })?;
    prepare(out)?;
    let mut written = Vec::new();
    for (name, split) in [("train", &ds.train), ("dev", &ds.dev), ("test", &ds.test)] {
        let path = out.join(format!("{name}.jsonl"));
        let mut buf = Vec::new();
        write_dataset(&mut buf, split.iter()).map_err(|e| CliError::io(&path, e))?;
        write(&path, buf)?;
        written.push(path);
    }
    let r = &ds.report;
    let mut txt = String::from("class\ttarget\tcount\n");
    for c in StructureClass::ALL {
        let k = c.to_string();
        let _ =
            writeln!(txt, "{k}\t{}\t{}", r.class_targets.get(&k).unwrap_or(&0), r.class_counts.get(&k).unwrap_or(&0));
    }
    txt.push_str("\nquestion type\tcount\n");
    for (k, v) in &r.question_types {
        let _ = writeln!(txt, "{k}\t{v}");
    }
    txt.push_str("\ndistractor category\tcount\n");
    for (k, v) in &r.distractors {
        let _ = writeln!(txt, "{k}\t{v}");
    }
    let _ = writeln!(txt, "\nsplit\ttrain {}\tdev {}\ttest {}", r.splits.train, r.splits.dev, r.splits.test);
    for (name, body) in [("report.json", json(r)), ("report.txt", txt)] {
        let path = out.join(name);
        write(&path, body)?;
        written.push(path);
    }
    tracing::info!(instances = ds.report.n_instances, out = %out.display(), "dataset written");
    Ok(written)
}

/// Writes `run.json` (per-instance and aggregate), `run.tsv` and
/// `predictions.tsv` into `out`.
pub fn cmd_run(dataset: &Path, method: Method, cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let instances = load_dataset(dataset)?;
    let report = run(&instances, method, cfg)?;
    prepare(out)?;
    write(&out.join("run.json"), json(&report))?;
    write(&out.join("run.tsv"), report.table())?;
    write(&out.join("predictions.tsv"), report.predictions())?;
    tracing::info!(method = %method, instances = instances.len(), "run finished");
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub gamma: f64,
    pub f1: f64,
    pub gm: f64,
}

/// Writes `curve.tsv`, `curve.json` and `predictions-<gamma>.tsv` per grid
/// value into `out`.
pub fn cmd_sweep(dataset: &Path, grid: &[f64], mode: FuseMode, cfg: &RunConfig, out: &Path) -> Result<Vec<CurveRow>> {
    let instances = load_dataset(dataset)?;
    let points = sweep(&instances, grid, mode, cfg)?;
    prepare(out)?;
    let mut tsv = String::from("gamma\tF1\tGM\n");
    let mut rows = Vec::new();
    for p in &points {
        let _ = writeln!(tsv, "{}\t{:.3}\t{:.3}", p.gamma, p.f1, p.gm);
        write(&out.join(format!("predictions-{}.tsv", p.gamma)), predictions(p.records.iter()))?;
        rows.push(CurveRow { gamma: p.gamma, f1: p.f1, gm: p.gm });
    }
    write(&out.join("curve.tsv"), tsv)?;
    write(&out.join("curve.json"), json(&rows))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub method: String,
    pub by_class: Vec<(String, Aggregate)>,
    pub by_question_type: Vec<(String, Aggregate)>,
}

pub fn breakdown(report: &RunReport, instances: &[QaInstance]) -> Result<Breakdown> {
    let known: std::collections::BTreeMap<&str, &QaInstance> = instances.iter().map(|i| (i.id.as_str(), i)).collect();
    for r in &report.instances {
        let inst =
            known.get(r.id.as_str()).ok_or_else(|| CliError::data(format!("instance {} not in dataset", r.id)))?;
        if inst.structure_class != r.structure_class || inst.question_type != r.question_type {
            return Err(CliError::data(format!("instance {} does not match the dataset", r.id)));
        }
    }
    let by_class = StructureClass::ALL
        .iter()
        .map(|&c| (c.to_string(), Aggregate::of(report.instances.iter().filter(|r| r.structure_class == c))))
        .filter(|(_, a)| a.n > 0)
        .collect();
    let by_question_type = QuestionType::ALL
        .iter()
        .map(|&t| (t.to_string(), Aggregate::of(report.instances.iter().filter(|r| r.question_type == t))))
        .filter(|(_, a)| a.n > 0)
        .collect();
    Ok(Breakdown { method: report.method.clone(), by_class, by_question_type })
}

/// Writes `breakdown.json` and `breakdown.tsv` into `out`.
pub fn cmd_breakdown(report: &Path, dataset: &Path, out: &Path) -> Result<Breakdown> {
    let text = fs::read_to_string(report).map_err(|e| CliError::io(report, e))?;
    let report: RunReport =
        serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", report.display())))?;
    let instances = load_dataset(dataset)?;
    let b = breakdown(&report, &instances)?;
    prepare(out)?;
    let tsv = format!("{}\n{}", group_table("class", &b.by_class), group_table("question type", &b.by_question_type));
    write(&out.join("breakdown.tsv"), tsv)?;
    write(&out.join("breakdown.json"), json(&b))?;
    Ok(b)
}
