//! Forward and backward graph-hop retrieval.
//!
//! Forward retrieval grows paths from `Q` depth-first, asking the scorer
//! for the next facts of each path. Backward retrieval seeds candidate
//! leaves and walks predecessors until the scorer accepts `Q`; chains that
//! never reach `Q` are dropped.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EvidenceGraph, FactId, NodeId};
use crate::scorers::{Scorer, ScorerQuery, SearchDirection};

/// Upper bound on scorer calls per retrieval, whatever the policy accepts.
const MAX_QUERIES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Most evidence nodes on one path.
    pub max_depth: usize,
    /// Most evidence nodes in the output graph.
    pub max_nodes: usize,
    /// Accepted candidates per path for top-k scorers.
    pub top_k_per_path: usize,
    /// Leaves seeded by backward retrieval.
    pub backward_seed_k: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self { max_depth: 4, max_nodes: 16, top_k_per_path: 2, backward_seed_k: 3 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("retrieval config field {0} must be positive")]
pub struct ConfigError(pub &'static str);

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("max_depth", self.max_depth),
            ("max_nodes", self.max_nodes),
            ("top_k_per_path", self.top_k_per_path),
            ("backward_seed_k", self.backward_seed_k),
        ] {
            if v == 0 {
                return Err(ConfigError(name));
            }
        }
        Ok(())
    }
}

/// A retrieved graph. `truncated` is set when a configured limit cut off
/// an accepted candidate, or when backward retrieval found no chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrieval {
    pub graph: EvidenceGraph,
    pub truncated: bool,
}

struct Walk<'s> {
    scorer: &'s dyn Scorer,
    question: &'s str,
    cfg: RetrievalConfig,
    queries: usize,
    truncated: bool,
}

impl Walk<'_> {
    fn accepted(&mut self, path: &[FactId], direction: SearchDirection) -> Vec<NodeId> {
        if self.queries >= MAX_QUERIES {
            self.truncated = true;
            return Vec::new();
        }
        self.queries += 1;
        let exclude: BTreeSet<FactId> = path.iter().copied().collect();
        let q = ScorerQuery { question: self.question, path_state: path, direction };
        self.scorer
            .score_candidates(&q, &exclude)
            .into_iter()
            .filter(|c| c.accept)
            .filter(|c| !matches!(c.node, NodeId::Fact(id) if exclude.contains(&id)))
            .map(|c| c.node)
            .collect()
    }
}

/// Depth-first forward retrieval from `Q`.
pub fn forward_retrieve(scorer: &dyn Scorer, question: &str, cfg: &RetrievalConfig) -> Retrieval {
    let mut walk = Walk { scorer, question, cfg: *cfg, queries: 0, truncated: false };
    let mut graph = EvidenceGraph::new();
    let mut path = Vec::new();
    forward_step(&mut walk, &mut graph, &mut path);
    Retrieval { graph, truncated: walk.truncated }
}

fn forward_step(walk: &mut Walk<'_>, graph: &mut EvidenceGraph, path: &mut Vec<FactId>) {
    let next = walk.accepted(path, SearchDirection::Forward);
    if path.len() >= walk.cfg.max_depth {
        walk.truncated |= next.iter().any(|n| !n.is_root());
        return;
    }
    let parent = path.last().map_or(NodeId::Root, |&id| NodeId::Fact(id));
    for node in next {
        let NodeId::Fact(id) = node else { continue };
        let exists = graph.contains_node(node);
        // an edge into an ancestor of the parent would close a cycle
        if exists && graph.reaches(node, parent) {
            continue;
        }
        let below = if exists { graph.height(node) } else { 0 };
        if graph.depth_of(parent) + 1 + below > walk.cfg.max_depth
            || (!exists && graph.evidence_count() >= walk.cfg.max_nodes)
        {
            walk.truncated = true;
            continue;
        }
        graph.add_edge(parent, node);
        path.push(id);
        forward_step(walk, graph, path);
        path.pop();
    }
}

/// Backward retrieval: seed candidate leaves, walk predecessors until the
/// scorer accepts `Q`, and keep only the chains that reach it.
pub fn backward_retrieve(scorer: &dyn Scorer, question: &str, cfg: &RetrievalConfig) -> Retrieval {
    let mut walk = Walk { scorer, question, cfg: *cfg, queries: 0, truncated: false };
    walk.queries += 1;
    let seed_query = ScorerQuery { question, path_state: &[], direction: SearchDirection::Backward };
    let seeds: Vec<FactId> = scorer
        .score_candidates(&seed_query, &BTreeSet::new())
        .into_iter()
        .filter(|c| c.score > 0.0)
        .filter_map(|c| c.node.as_fact())
        .take(cfg.backward_seed_k)
        .collect();

    let mut closed: Vec<Vec<FactId>> = Vec::new();
    for seed in seeds {
        let mut chain = vec![seed];
        backward_step(&mut walk, &mut chain, &mut closed);
    }

    let mut graph = EvidenceGraph::new();
    for chain in &closed {
        let fresh = chain.iter().filter(|&&id| !graph.contains_node(NodeId::Fact(id))).count();
        if graph.evidence_count() + fresh > cfg.max_nodes {
            walk.truncated = true;
            continue;
        }
        let mut candidate = graph.clone();
        let mut parent = NodeId::Root;
        for &id in chain.iter().rev() {
            candidate.add_edge(parent, NodeId::Fact(id));
            parent = NodeId::Fact(id);
        }
        if !candidate.is_acyclic() {
            continue;
        }
        if candidate.depth() > cfg.max_depth {
            walk.truncated = true;
            continue;
        }
        graph = candidate;
    }
    let truncated = walk.truncated || graph.evidence_count() == 0;
    Retrieval { graph, truncated }
}

fn backward_step(walk: &mut Walk<'_>, chain: &mut Vec<FactId>, closed: &mut Vec<Vec<FactId>>) {
    for node in walk.accepted(chain, SearchDirection::Backward) {
        match node {
            NodeId::Root => closed.push(chain.clone()),
            NodeId::Fact(id) => {
                if chain.len() >= walk.cfg.max_depth {
                    walk.truncated = true;
                    continue;
                }
                chain.push(id);
                backward_step(walk, chain, closed);
                chain.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_graph, Fact, TextualDatabase, Triple};
    use crate::scorers::{AcceptPolicy, NoisyOracleScorer, OracleScorer, ScoredCandidate};

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }

    fn db(count: u32) -> TextualDatabase {
        TextualDatabase::new(
            (0..count)
                .map(|i| Fact {
                    id: FactId(i),
                    text: format!("fact {i}"),
                    is_distractor: false,
                    distractor_kind: None,
                    provenance: vec![Triple::new(format!("e{i}"), "r", "v").unwrap()],
                })
                .collect(),
        )
        .unwrap()
    }

    struct Silent;
    impl Scorer for Silent {
        fn score_candidates(&self, _: &ScorerQuery<'_>, _: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
            Vec::new()
        }
    }

    /// Accepts every fact; forward search must still terminate.
    struct Greedy(u32);
    impl Scorer for Greedy {
        fn score_candidates(&self, q: &ScorerQuery<'_>, ex: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
            let mut scored: Vec<(NodeId, f64)> =
                (0..self.0).map(FactId).filter(|id| !ex.contains(id)).map(|id| (NodeId::Fact(id), 1.0)).collect();
            if q.direction == SearchDirection::Backward && !q.path_state.is_empty() {
                scored.push((Q, 1.0));
            }
            AcceptPolicy::Threshold(0.5).apply(scored)
        }
    }

    #[test]
    fn oracle_recovers_a_chain_both_ways() {
        let gold = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2))]);
        let d = db(5);
        let o = OracleScorer::new(&gold, &d);
        let cfg = RetrievalConfig::default();
        let f = forward_retrieve(&o, "q", &cfg);
        assert_eq!(f, Retrieval { graph: gold.clone(), truncated: false });
        let b = backward_retrieve(&o, "q", &cfg);
        assert_eq!(b, Retrieval { graph: gold, truncated: false });
    }

    #[test]
    fn two_chains_recovered_backward() {
        // seeds {1, 3}; 1 <- Q closes, 3 <- Q closes
        let gold = EvidenceGraph::from_edges([(Q, n(1)), (Q, n(3))]);
        let d = db(5);
        let o = OracleScorer::new(&gold, &d);
        let cfg = RetrievalConfig { backward_seed_k: 2, ..Default::default() };
        assert_eq!(backward_retrieve(&o, "q", &cfg).graph, gold);
    }

    #[test]
    fn silent_scorer_gives_root_only() {
        let cfg = RetrievalConfig::default();
        let f = forward_retrieve(&Silent, "q", &cfg);
        assert_eq!(f.graph, EvidenceGraph::new());
        assert!(!f.truncated);
        let b = backward_retrieve(&Silent, "q", &cfg);
        assert_eq!(b.graph, EvidenceGraph::new());
        assert!(b.truncated);
    }

    #[test]
    fn unconnected_seeds_are_dropped() {
        // seed 4 is a leaf of nothing: the oracle accepts no predecessor
        let gold = EvidenceGraph::from_edges([(Q, n(1))]);
        let d = db(6);
        let noisy = NoisyOracleScorer::new(OracleScorer::new(&gold, &d), 0.0, 1);
        struct SeedDistractor<'a>(NoisyOracleScorer<'a>);
        impl Scorer for SeedDistractor<'_> {
            fn score_candidates(&self, q: &ScorerQuery<'_>, ex: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
                let mut out = self.0.score_candidates(q, ex);
                if q.path_state.is_empty() {
                    for c in &mut out {
                        if c.node == NodeId::fact(4) {
                            c.score = 2.0;
                        }
                    }
                    out.sort_by(|a, b| b.score.total_cmp(&a.score));
                }
                out
            }
        }
        let r = backward_retrieve(&SeedDistractor(noisy), "q", &RetrievalConfig::default());
        assert_eq!(r.graph, gold);
    }

    #[test]
    fn limits_truncate_but_keep_the_graph_valid() {
        let d = db(30);
        let cfg = RetrievalConfig { max_depth: 3, max_nodes: 6, ..Default::default() };
        let f = forward_retrieve(&Greedy(30), "q", &cfg);
        assert!(f.truncated);
        assert!(f.graph.evidence_count() <= 6);
        assert!(f.graph.depth() <= 3);
        assert!(validate_graph(&f.graph, &d).is_empty(), "{:?}", f.graph);
        for path in f.graph.root_to_leaf_paths() {
            let unique: BTreeSet<_> = path.iter().collect();
            assert_eq!(unique.len(), path.len());
        }

        let b = backward_retrieve(&Greedy(30), "q", &cfg);
        assert!(b.truncated);
        assert!(b.graph.evidence_count() <= 6);
        assert!(validate_graph(&b.graph, &d).is_empty(), "{:?}", b.graph);
    }

    #[test]
    fn config_validation() {
        assert!(RetrievalConfig::default().validate().is_ok());
        let bad = RetrievalConfig { top_k_per_path: 0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ConfigError("top_k_per_path")));
    }
}
