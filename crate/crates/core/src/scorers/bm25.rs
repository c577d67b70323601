use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::{AcceptPolicy, ScoredCandidate, Scorer, ScorerQuery, SearchDirection};
use crate::model::{FactId, NodeId, TextualDatabase};

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("cannot index an empty database")]
    EmptyDatabase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Posting {
    id: FactId,
    len: u32,
    tf: BTreeMap<String, u32>,
}

/// Token statistics over the fact texts of one database.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Index {
    postings: Vec<Posting>,
    df: BTreeMap<String, u32>,
    avg_len: f64,
}

pub fn build_index(db: &TextualDatabase) -> Result<Index, IndexError> {
    if db.is_empty() {
        return Err(IndexError::EmptyDatabase);
    }
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    let mut postings = Vec::with_capacity(db.len());
    for fact in db.facts() {
        let tokens = tokenize(&fact.text);
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in &tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for t in tf.keys() {
            *df.entry(t.clone()).or_default() += 1;
        }
        postings.push(Posting { id: fact.id, len: tokens.len() as u32, tf });
    }
    let avg_len = postings.iter().map(|p| f64::from(p.len)).sum::<f64>() / postings.len() as f64;
    Ok(Index { postings, df, avg_len })
}

impl Index {
    pub fn len(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Length-normalisation factor `k1 * (1 - b + b * len / avg_len)`.
    pub fn length_norm(&self, id: FactId) -> Option<f64> {
        self.posting(id).map(|p| self.norm(p))
    }

    fn norm(&self, p: &Posting) -> f64 {
        let rel = if self.avg_len > 0.0 { f64::from(p.len) / self.avg_len } else { 0.0 };
        K1 * (1.0 - B + B * rel)
    }

    fn posting(&self, id: FactId) -> Option<&Posting> {
        self.postings.iter().find(|p| p.id == id)
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.postings.len() as f64;
        let df = f64::from(self.df.get(term).copied().unwrap_or(0));
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn score(&self, terms: &BTreeSet<String>, p: &Posting) -> f64 {
        let norm = self.norm(p);
        terms
            .iter()
            .filter_map(|t| p.tf.get(t).map(|&tf| (t, f64::from(tf))))
            .map(|(t, tf)| self.idf(t) * tf * (K1 + 1.0) / (tf + norm))
            .sum()
    }

    /// BM25 score of every fact against free text, ranked.
    pub fn rank_text(&self, text: &str) -> Vec<(FactId, f64)> {
        let terms: BTreeSet<String> = tokenize(text).into_iter().collect();
        let mut out: Vec<(NodeId, f64)> =
            self.postings.iter().map(|p| (NodeId::Fact(p.id), self.score(&terms, p))).collect();
        super::rank(&mut out);
        out.into_iter().filter_map(|(n, s)| n.as_fact().map(|id| (id, s))).collect()
    }
}

/// Lexical scorer: facts are scored against the question joined with the
/// texts of the facts already on the path. Walking backward, `Q` competes
/// as a predecessor with the frontier fact's score against the question
/// alone.
pub struct Bm25Scorer<'a> {
    index: &'a Index,
    policy: AcceptPolicy,
}

impl<'a> Bm25Scorer<'a> {
    pub fn new(index: &'a Index, policy: AcceptPolicy) -> Self {
        Self { index, policy }
    }
}

impl Scorer for Bm25Scorer<'_> {
    fn score_candidates(&self, q: &ScorerQuery<'_>, exclude: &BTreeSet<FactId>) -> Vec<ScoredCandidate> {
        let question: BTreeSet<String> = tokenize(q.question).into_iter().collect();
        let mut terms = question.clone();
        for id in q.path_state {
            if let Some(p) = self.index.posting(*id) {
                terms.extend(p.tf.keys().cloned());
            }
        }
        let mut scored: Vec<(NodeId, f64)> = self
            .index
            .postings
            .iter()
            .filter(|p| !exclude.contains(&p.id))
            .map(|p| (NodeId::Fact(p.id), self.index.score(&terms, p)))
            .collect();
        if q.direction == SearchDirection::Backward {
            if let Some(p) = q.path_state.last().and_then(|&id| self.index.posting(id)) {
                scored.push((NodeId::Root, self.index.score(&question, p)));
            }
        }
        self.policy.apply(scored)
    }
}
