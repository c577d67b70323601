use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use graphhop_core::metrics::InstanceMetrics;
use graphhop_core::model::{serialize_chains, EvidenceGraph, FactId, NodeId, QaInstance};
use graphhop_core::reader::read;
use graphhop_core::reconstruct::{fuse, FuseMode, FuseOutcome};
use graphhop_core::retrieval::{backward_retrieve, forward_retrieve, Retrieval, RetrievalConfig};
use graphhop_core::scorers::{build_index, AcceptPolicy, Index, Scorer};
use graphhop_core::seed;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{Aggregate, FusionRecord, InstanceRecord, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Random,
    Bm25Topk,
    Forward,
    Backward,
    Bgr,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Random, Method::Bm25Topk, Method::Forward, Method::Backward, Method::Bgr];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Bm25Topk => "bm25-topk",
            Method::Forward => "forward",
            Method::Backward => "backward",
            Method::Bgr => "bgr",
        }
    }

    /// Set-only baselines retrieve |gold| facts in one hop.
    pub fn is_single_hop(self) -> bool {
        matches!(self, Method::Random | Method::Bm25Topk)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            CliError::usage(format!("unknown method {s:?}; expected random, bm25-topk, forward, backward or bgr"))
        })
    }
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(CliError::usage)
}

fn index(inst: &QaInstance) -> Result<Index> {
    build_index(&inst.database).map_err(|e| CliError::data(format!("instance {}: {e}", inst.id)))
}

fn flat_graph(ids: impl IntoIterator<Item = FactId>) -> EvidenceGraph {
    EvidenceGraph::from_edges(ids.into_iter().map(|id| (NodeId::Root, id.into())))
}

struct Retrieved {
    graph: EvidenceGraph,
    truncated: bool,
    fusion: Option<FuseOutcome>,
}

fn single_hop(method: Method, inst: &QaInstance, seed_base: u64) -> Result<EvidenceGraph> {
    let k = inst.gold_ids().len();
    let ids: Vec<FactId> = match method {
        Method::Random => {
            let mut all: Vec<FactId> = inst.database.ids().collect();
            all.shuffle(&mut seed::rng(seed_base, &[seed::hash_str(&inst.id)]));
            all.into_iter().take(k).collect()
        }
        _ => index(inst)?.rank_text(&inst.question).into_iter().take(k).map(|(id, _)| id).collect(),
    };
    Ok(flat_graph(ids))
}

/// Forward and backward graphs of one instance under the configured scorer.
pub(crate) fn both_directions(inst: &QaInstance, cfg: &RunConfig) -> Result<(Retrieval, Retrieval)> {
    let index = index(inst)?;
    let scorer = scorer(inst, &index, cfg);
    Ok((
        forward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval),
        backward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval),
    ))
}

fn scorer<'a>(inst: &'a QaInstance, index: &'a Index, cfg: &RunConfig) -> Box<dyn Scorer + 'a> {
    cfg.scorer.build(inst, index, AcceptPolicy::TopK(cfg.retrieval.top_k_per_path), cfg.seed)
}

fn retrieve(method: Method, inst: &QaInstance, cfg: &RunConfig) -> Result<Retrieved> {
    if method.is_single_hop() {
        return Ok(Retrieved { graph: single_hop(method, inst, cfg.seed)?, truncated: false, fusion: None });
    }
    let index = index(inst)?;
    let scorer = scorer(inst, &index, cfg);
    let r = match method {
        Method::Forward => forward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval),
        Method::Backward => backward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval),
        _ => {
            let f = forward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval);
            let b = backward_retrieve(scorer.as_ref(), &inst.question, &cfg.retrieval);
            let out = fuse(&f.graph, &b.graph, cfg.gamma, cfg.fuse_mode).map_err(CliError::usage)?;
            return Ok(Retrieved {
                graph: out.graph.clone(),
                truncated: f.truncated || b.truncated,
                fusion: Some(out),
            });
        }
    };
    Ok(Retrieved { graph: r.graph, truncated: r.truncated, fusion: None })
}

/// Scores one predicted graph against an instance.
pub(crate) fn record(inst: &QaInstance, graph: &EvidenceGraph, with_graph: bool) -> InstanceRecord {
    let answer = read(inst, graph);
    let m = InstanceMetrics::compute(graph, &inst.gold_graph, &answer, &inst.answer, with_graph);
    let mut r = InstanceRecord {
        id: inst.id.clone(),
        structure_class: inst.structure_class,
        question_type: inst.question_type,
        predicted: serialize_chains(graph),
        answer,
        gm: None,
        gs: None,
        ged: None,
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        em: false,
        qa_em: false,
        truncated: false,
        fusion: None,
    };
    r.metrics(&m);
    r
}

fn run_one(method: Method, inst: &QaInstance, cfg: &RunConfig) -> Result<InstanceRecord> {
    let got = retrieve(method, inst, cfg)?;
    let mut r = record(inst, &got.graph, !method.is_single_hop());
    r.truncated = got.truncated;
    r.fusion = got.fusion.map(|f| FusionRecord {
        branch: f.branch,
        bsc: f.bsc,
        cycle_repaired: f.cycle_repaired,
        dedup_ambiguous: f.dedup_ambiguous,
    });
    Ok(r)
}

/// Runs `method` over every instance; output order follows the input.
pub fn run(instances: &[QaInstance], method: Method, cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let records: Vec<InstanceRecord> = pool(cfg.workers)?
        .install(|| instances.par_iter().map(|inst| run_one(method, inst, cfg)).collect::<Result<_>>())?;
    let graph_method = !method.is_single_hop();
    let ids: BTreeSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    if ids.len() != records.len() {
        return Err(CliError::data("dataset repeats an instance id"));
    }
    Ok(RunReport {
        method: method.to_string(),
        scorer: graph_method.then(|| cfg.scorer.to_string()),
        gamma: (method == Method::Bgr).then_some(cfg.gamma),
        fuse_mode: (method == Method::Bgr).then(|| cfg.fuse_mode.to_string()),
        seed: cfg.seed,
        retrieval: if graph_method { cfg.retrieval } else { RetrievalConfig { max_depth: 1, ..cfg.retrieval } },
        aggregate: Aggregate::of(&records),
        truncated: records.iter().filter(|r| r.truncated).count(),
        instances: records,
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub f1: f64,
    pub gm: f64,
    pub records: Vec<InstanceRecord>,
}

/// Retrieves both directions once per instance, then fuses at every gamma.
pub fn sweep(instances: &[QaInstance], grid: &[f64], mode: FuseMode, cfg: &RunConfig) -> Result<Vec<SweepPoint>> {
    let cfg = RunConfig { gamma_grid: grid.to_vec(), ..cfg.clone() };
    cfg.validate()?;
    let pool = pool(cfg.workers)?;
    let cached: Vec<(Retrieval, Retrieval)> =
        pool.install(|| instances.par_iter().map(|inst| both_directions(inst, &cfg)).collect::<Result<_>>())?;
    grid.iter()
        .map(|&gamma| {
            let records: Vec<InstanceRecord> = pool.install(|| {
                instances
                    .par_iter()
                    .zip(&cached)
                    .map(|(inst, (f, b))| {
                        let out = fuse(&f.graph, &b.graph, gamma, mode).map_err(CliError::usage)?;
                        let mut r = record(inst, &out.graph, true);
                        r.truncated = f.truncated || b.truncated;
                        Ok(r)
                    })
                    .collect::<Result<_>>()
            })?;
            let agg = Aggregate::of(&records);
            Ok(SweepPoint { gamma, f1: agg.f1, gm: agg.gm.unwrap_or(0.0), records })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        let err = "dpr".parse::<Method>().unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
