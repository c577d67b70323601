//! Explanation-graph metrics (GM, GS, GED), evidence-set metrics
//! (precision, recall, F1, exact match), bidirectional subgraph
//! consistency and QA exact match.

use std::collections::BTreeSet;

use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::model::{EvidenceGraph, FactId, NodeId};

/// 1 iff node and edge sets are identical.
pub fn graph_match(pred: &EvidenceGraph, gold: &EvidenceGraph) -> bool {
    pred.nodes() == gold.nodes() && pred.edges() == gold.edges()
}

fn to_petgraph(g: &EvidenceGraph) -> DiGraph<bool, ()> {
    let mut out = DiGraph::new();
    let index: std::collections::BTreeMap<NodeId, NodeIndex> =
        g.nodes().iter().map(|&n| (n, out.add_node(n.is_root()))).collect();
    for (a, b) in g.edges() {
        out.add_edge(index[a], index[b], ());
    }
    out
}

/// 1 iff some bijection maps `Q` to `Q` and the predicted edges exactly
/// onto the gold edges. Node identity is ignored.
pub fn graph_structure(pred: &EvidenceGraph, gold: &EvidenceGraph) -> bool {
    if pred.nodes().len() != gold.nodes().len() || pred.edges().len() != gold.edges().len() {
        return false;
    }
    is_isomorphic_matching(&to_petgraph(pred), &to_petgraph(gold), |a, b| a == b, |_, _| true)
}

/// Minimum number of unit-cost node/edge insertions and deletions turning
/// `pred` into `gold`.
///
/// Nodes are identified by label, so the node correspondence is forced:
/// each node or edge present in only one graph needs exactly one operation,
/// and deleting edges, then nodes, then inserting nodes, then edges realises
/// that count.
pub fn graph_edit_distance(pred: &EvidenceGraph, gold: &EvidenceGraph) -> u32 {
    let nodes = pred.nodes().symmetric_difference(gold.nodes()).count();
    let edges = pred.edges().symmetric_difference(gold.edges()).count();
    (nodes + edges) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub em: bool,
}

/// Precision, recall, F1 and exact match of predicted evidence ids.
/// Empty prediction gives precision 0; empty gold gives recall 0; F1 is 0
/// when precision + recall is 0.
pub fn set_metrics(pred: &BTreeSet<FactId>, gold: &BTreeSet<FactId>) -> SetMetrics {
    let hit = pred.intersection(gold).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { hit / den as f64 };
    let precision = ratio(pred.len());
    let recall = ratio(gold.len());
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    SetMetrics { precision, recall, f1, em: pred == gold }
}

/// Jaccard overlap of the two edge sets; 0 when both are empty.
pub fn bsc(forward: &EvidenceGraph, backward: &EvidenceGraph) -> f64 {
    let inter = forward.edges().intersection(backward.edges()).count();
    let union = forward.edges().len() + backward.edges().len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn normalize_answer(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// 1 iff the answers agree after lowercasing and whitespace collapsing.
pub fn qa_em(pred: &str, gold: &str) -> bool {
    normalize_answer(pred) == normalize_answer(gold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphScores {
    pub gm: bool,
    pub gs: bool,
    pub ged: u32,
}

impl GraphScores {
    pub fn compute(pred: &EvidenceGraph, gold: &EvidenceGraph) -> Self {
        Self { gm: graph_match(pred, gold), gs: graph_structure(pred, gold), ged: graph_edit_distance(pred, gold) }
    }
}

/// Everything scored for one instance. `graph` is absent for methods that
/// only return an evidence set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub graph: Option<GraphScores>,
    pub set: SetMetrics,
    pub qa_em: bool,
}

impl InstanceMetrics {
    pub fn compute(
        pred: &EvidenceGraph,
        gold: &EvidenceGraph,
        pred_answer: &str,
        gold_answer: &str,
        with_graph: bool,
    ) -> Self {
        let p: BTreeSet<FactId> = pred.fact_ids().collect();
        let g: BTreeSet<FactId> = gold.fact_ids().collect();
        Self {
            graph: with_graph.then(|| GraphScores::compute(pred, gold)),
            set: set_metrics(&p, &g),
            qa_em: qa_em(pred_answer, gold_answer),
        }
    }
}
