use std::collections::BTreeSet;

use super::{AcceptPolicy, ScoredCandidate, Scorer, ScorerQuery, SearchDirection};
use crate::model::{FactId, NodeId, TextualDatabase};
use crate::seed;

/// Uniform random scores, fixed per (seed, query, candidate).
pub struct RandomScorer<'a> {
    db: &'a TextualDatabase,
    policy: AcceptPolicy,
    seed: u64,
}

impl<'a> RandomScorer<'a> {
    pub fn new(db: &'a TextualDatabase, policy: AcceptPolicy, seed: u64) -> Self {
        Self { db, policy, seed }
    }
}

impl Scorer for RandomScorer<'_> {
    fn score_candidates(&self, q: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
        let mut key = vec![q.direction.key()];
        key.extend(q.path_state.iter().map(|id| u64::from(id.0)));
        let query_seed = seed::mix(self.seed, &key);
        // scores lie in (0, 1] so a top-k policy always fills its quota
        let draw = |n: u64| 1.0 - seed::unit(query_seed, &[n]);
        let mut scored: Vec<(NodeId, f64)> = self
            .db
            .ids()
            .filter(|id| !exclude.contains(id))
            .map(|id| (NodeId::Fact(id), draw(u64::from(id.0) + 1)))
            .collect();
        if q.direction == SearchDirection::Backward && !q.path_state.is_empty() {
            scored.push((NodeId::Root, draw(0)));
        }
        self.policy.apply(scored)
    }
}
