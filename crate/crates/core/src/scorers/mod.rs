//! Evidence scorers. A scorer looks at the question plus the facts already
//! on the current path and decides which facts (or, walking backward, the
//! question root) may extend the path.
//!
//! The learned matcher of a neural retriever would slot in behind
//! [`Scorer`]; this crate ships lexical, random, oracle and noisy-oracle
//! implementations.

mod bm25;
mod oracle;
mod random;

pub use bm25::{build_index, tokenize, Bm25Scorer, Index, IndexError, B, K1};
pub use oracle::{NoisyOracleScorer, OracleScorer};
pub use random::RandomScorer;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FactId, NodeId, QaInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchDirection {
    /// Looking for children of the path's last fact (or of `Q`).
    Forward,
    /// Looking for parents of the path's last fact; `Q` is a candidate.
    Backward,
}

impl SearchDirection {
    fn key(self) -> u64 {
        match self {
            SearchDirection::Forward => 1,
            SearchDirection::Backward => 2,
        }
    }
}

/// What the scorer is asked. `path_state` lists the facts on the current
/// path in visiting order; its last element is the node being extended.
/// Walking backward, the first element is the seed leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerQuery<'a> {
    pub question: &'a str,
    pub path_state: &'a [FactId],
    pub direction: SearchDirection,
}

impl ScorerQuery<'_> {
    pub fn frontier(&self) -> NodeId {
        self.path_state.last().map_or(NodeId::Root, |&id| NodeId::Fact(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub node: NodeId,
    pub score: f64,
    pub accept: bool,
}

pub trait Scorer {
    /// Scores every fact outside `exclude`, plus `Q` for backward queries
    /// with a non-empty path. The result is ranked by descending score,
    /// ties broken by ascending node id.
    fn score_candidates(&self, query: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<ScoredCandidate>;
}

/// How scored candidates turn into accepted ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptPolicy {
    /// The `k` best candidates with a positive score.
    TopK(usize),
    /// Every candidate scoring at least the threshold.
    Threshold(f64),
}

impl Default for AcceptPolicy {
    fn default() -> Self {
        AcceptPolicy::TopK(2)
    }
}

impl AcceptPolicy {
    /// Ranks `scored` and sets the accept flags.
    pub fn apply(self, mut scored: Vec<(NodeId, f64)>) -> Vec<ScoredCandidate> {
        rank(&mut scored);
        scored
            .into_iter()
            .enumerate()
            .map(|(i, (node, score))| {
                let accept = match self {
                    AcceptPolicy::TopK(k) => i < k && score > 0.0,
                    AcceptPolicy::Threshold(t) => score >= t,
                };
                ScoredCandidate { node, score, accept }
            })
            .collect()
    }
}

pub(crate) fn rank(scored: &mut [(NodeId, f64)]) {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Scorer selection as written in run configs and on the command line:
/// `random`, `bm25`, `oracle` or `noisy-oracle(p, seed)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScorerSpec {
    Random,
    Bm25,
    Oracle,
    NoisyOracle { p: f64, seed: Option<u64> },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown scorer {0:?}; expected random, bm25, oracle or noisy-oracle(p, seed)")]
pub struct ScorerSpecError(String);

impl FromStr for ScorerSpec {
    type Err = ScorerSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScorerSpecError(s.to_string());
        let t = s.trim();
        match t {
            "random" => return Ok(ScorerSpec::Random),
            "bm25" => return Ok(ScorerSpec::Bm25),
            "oracle" => return Ok(ScorerSpec::Oracle),
            _ => {}
        }
        let args = t.strip_prefix("noisy-oracle(").and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
        let mut parts = args.split(',').map(str::trim);
        let p: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(err)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(err());
        }
        let seed = match parts.next() {
            None => None,
            Some(v) => Some(v.parse().map_err(|_| err())?),
        };
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(ScorerSpec::NoisyOracle { p, seed })
    }
}

impl TryFrom<String> for ScorerSpec {
    type Error = ScorerSpecError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ScorerSpec> for String {
    fn from(s: ScorerSpec) -> Self {
        s.to_string()
    }
}

impl fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorerSpec::Random => f.write_str("random"),
            ScorerSpec::Bm25 => f.write_str("bm25"),
            ScorerSpec::Oracle => f.write_str("oracle"),
            ScorerSpec::NoisyOracle { p, seed: None } => write!(f, "noisy-oracle({p})"),
            ScorerSpec::NoisyOracle { p, seed: Some(s) } => write!(f, "noisy-oracle({p}, {s})"),
        }
    }
}

impl ScorerSpec {
    /// Instantiates the scorer for one instance. `seed` feeds the random
    /// scorers unless the spec pins its own.
    pub fn build<'a>(
        &self,
        instance: &'a QaInstance,
        index: &'a Index,
        policy: AcceptPolicy,
        seed: u64,
    ) -> Box<dyn Scorer + 'a> {
        let key = crate::seed::hash_str(&instance.id);
        match *self {
            ScorerSpec::Random => {
                Box::new(RandomScorer::new(&instance.database, policy, crate::seed::mix(seed, &[key])))
            }
            ScorerSpec::Bm25 => Box::new(Bm25Scorer::new(index, policy)),
            ScorerSpec::Oracle => Box::new(OracleScorer::new(&instance.gold_graph, &instance.database)),
            ScorerSpec::NoisyOracle { p, seed: own } => Box::new(NoisyOracleScorer::new(
                OracleScorer::new(&instance.gold_graph, &instance.database),
                p,
                crate::seed::mix(own.unwrap_or(seed), &[key]),
            )),
        }
    }
}
