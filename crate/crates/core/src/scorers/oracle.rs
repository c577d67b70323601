use std::collections::BTreeSet;

use super::{ScoredCandidate, Scorer, ScorerQuery, SearchDirection};
use crate::model::{EvidenceGraph, FactId, NodeId, TextualDatabase};
use crate::seed;

/// Accepts exactly the gold neighbours of the frontier: gold children
/// walking forward, gold parents walking backward, and the gold leaves as
/// backward seeds.
pub struct OracleScorer<'a> {
    gold: &'a EvidenceGraph,
    db: &'a TextualDatabase,
}

impl<'a> OracleScorer<'a> {
    pub fn new(gold: &'a EvidenceGraph, db: &'a TextualDatabase) -> Self {
        Self { gold, db }
    }

    fn gold_targets(&self, q: &ScorerQuery<'_>) -> BTreeSet<NodeId> {
        let frontier = q.frontier();
        match q.direction {
            SearchDirection::Forward => self.gold.children(frontier).collect(),
            SearchDirection::Backward if q.path_state.is_empty() => {
                self.gold.nodes().iter().copied().filter(|&n| !n.is_root() && self.gold.is_leaf(n)).collect()
            }
            SearchDirection::Backward if self.gold.contains_node(frontier) => self.gold.parents(frontier).collect(),
            SearchDirection::Backward => BTreeSet::new(),
        }
    }

    fn candidates(&self, q: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.db.ids().filter(|id| !exclude.contains(id)).map(NodeId::Fact).collect();
        if q.direction == SearchDirection::Backward && !q.path_state.is_empty() {
            out.push(NodeId::Root);
        }
        out
    }
}

impl Scorer for OracleScorer<'_> {
    fn score_candidates(&self, q: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
        let targets = self.gold_targets(q);
        let mut out: Vec<ScoredCandidate> = self
            .candidates(q, exclude)
            .into_iter()
            .map(|node| {
                let accept = targets.contains(&node);
                ScoredCandidate { node, score: if accept { 1.0 } else { 0.0 }, accept }
            })
            .collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
        out
    }
}

/// The oracle with seeded mistakes. For every query each gold decision is
/// dropped with probability `p`, and with probability `p` one non-gold
/// fact is accepted as well. Decisions are keyed by (direction, frontier,
/// candidate), so they do not depend on traversal order.
pub struct NoisyOracleScorer<'a> {
    oracle: OracleScorer<'a>,
    p: f64,
    seed: u64,
}

const SPURIOUS_SCORE: f64 = 0.5;

impl<'a> NoisyOracleScorer<'a> {
    pub fn new(oracle: OracleScorer<'a>, p: f64, seed: u64) -> Self {
        Self { oracle, p, seed }
    }

    fn node_key(n: NodeId) -> u64 {
        n.as_fact().map_or(0, |id| u64::from(id.0) + 1)
    }
}

impl Scorer for NoisyOracleScorer<'_> {
    fn score_candidates(&self, q: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
        let mut out = self.oracle.score_candidates(q, exclude);
        if self.p <= 0.0 {
            return out;
        }
        let frontier = Self::node_key(q.frontier());
        let seeded = u64::from(q.path_state.is_empty());
        let base = seed::mix(self.seed, &[q.direction.key(), frontier, seeded]);
        for c in out.iter_mut().filter(|c| c.accept) {
            if seed::unit(base, &[1, Self::node_key(c.node)]) < self.p {
                c.accept = false;
                c.score = 0.0;
            }
        }
        let targets = self.oracle.gold_targets(q);
        let pool: Vec<usize> = out
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.accept && !c.node.is_root() && !targets.contains(&c.node))
            .map(|(i, _)| i)
            .collect();
        if !pool.is_empty() && seed::unit(base, &[2]) < self.p {
            let pick = (seed::mix(base, &[3]) % pool.len() as u64) as usize;
            let c = &mut out[pool[pick]];
            c.accept = true;
            c.score = SPURIOUS_SCORE;
        }
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Fact, Triple};

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }

    fn db(n: u32) -> TextualDatabase {
        TextualDatabase::new(
            (0..n)
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

    fn accepted(s: &dyn Scorer, path: &[FactId], dir: SearchDirection) -> Vec<NodeId> {
        let q = ScorerQuery { question: "q", path_state: path, direction: dir };
        let exclude: BTreeSet<FactId> = path.iter().copied().collect();
        s.score_candidates(&q, &exclude).into_iter().filter(|c| c.accept).map(|c| c.node).collect()
    }

    #[test]
    fn oracle_follows_gold_edges() {
        let gold = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2)), (Q, n(3))]);
        let d = db(6);
        let o = OracleScorer::new(&gold, &d);
        assert_eq!(accepted(&o, &[], SearchDirection::Forward), [n(1), n(3)]);
        assert_eq!(accepted(&o, &[FactId(1)], SearchDirection::Forward), [n(2)]);
        assert_eq!(accepted(&o, &[], SearchDirection::Backward), [n(2), n(3)]);
        assert_eq!(accepted(&o, &[FactId(2)], SearchDirection::Backward), [n(1)]);
        assert_eq!(accepted(&o, &[FactId(2), FactId(1)], SearchDirection::Backward), [Q]);
        assert!(accepted(&o, &[FactId(5)], SearchDirection::Backward).is_empty());
    }

    #[test]
    fn noisy_oracle_is_seeded_and_degenerates_to_oracle() {
        let gold = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2)), (Q, n(3))]);
        let d = db(25);
        let clean = NoisyOracleScorer::new(OracleScorer::new(&gold, &d), 0.0, 9);
        let o = OracleScorer::new(&gold, &d);
        for path in [&[][..], &[FactId(1)][..]] {
            assert_eq!(accepted(&clean, path, SearchDirection::Forward), accepted(&o, path, SearchDirection::Forward));
        }
        let a = NoisyOracleScorer::new(OracleScorer::new(&gold, &d), 0.5, 11);
        let b = NoisyOracleScorer::new(OracleScorer::new(&gold, &d), 0.5, 11);
        let mut differs = false;
        for f in 0..25 {
            let path = [FactId(f)];
            let x = accepted(&a, &path, SearchDirection::Forward);
            assert_eq!(x, accepted(&b, &path, SearchDirection::Forward));
            differs |= !x.is_empty();
        }
        assert!(differs, "p=0.5 should inject some spurious acceptances");
    }

    #[test]
    fn noise_never_accepts_excluded_facts() {
        let gold = EvidenceGraph::from_edges([(Q, n(1))]);
        let d = db(4);
        let s = NoisyOracleScorer::new(OracleScorer::new(&gold, &d), 1.0, 5);
        let q = ScorerQuery { question: "q", path_state: &[], direction: SearchDirection::Forward };
        let exclude = BTreeSet::from([FactId(0), FactId(2), FactId(3)]);
        let out = s.score_candidates(&q, &exclude);
        assert!(out.iter().all(|c| c.node == n(1)));
    }
}
