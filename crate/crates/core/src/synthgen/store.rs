use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Triple, TripleSource};

const BUNDLED: &str = include_str!("../../data/world.tsv");

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: expected head<TAB>relation<TAB>tail")]
    Malformed { line: usize },
    #[error("line {line}: duplicate triple {triple}")]
    Duplicate { line: usize, triple: Triple },
    #[error("the triple file holds no triples")]
    Empty,
}

/// An indexed set of knowledge triples.
#[derive(Debug, Clone)]
pub struct TripleStore {
    triples: Vec<Triple>,
    by_head_rel: BTreeMap<(String, String), Vec<usize>>,
    by_tail_rel: BTreeMap<(String, String), Vec<usize>>,
    by_head: BTreeMap<String, Vec<usize>>,
    tails: BTreeSet<String>,
    by_relation: BTreeMap<String, Vec<usize>>,
}

impl TripleStore {
    /// The geography/film/people store shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED).expect("bundled triple file is well-formed")
    }

    /// Parses `head<TAB>relation<TAB>tail` lines; blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, StoreError> {
        let mut triples = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut parts = raw.split('\t');
            let (Some(h), Some(r), Some(t), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(StoreError::Malformed { line });
            };
            let triple = Triple::new(h.trim(), r.trim(), t.trim()).map_err(|_| StoreError::Malformed { line })?;
            if !triples.insert(triple.clone()) {
                return Err(StoreError::Duplicate { line, triple });
            }
        }
        Self::new(triples)
    }

    pub fn new(triples: impl IntoIterator<Item = Triple>) -> Result<Self, StoreError> {
        let triples: Vec<Triple> = triples.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if triples.is_empty() {
            return Err(StoreError::Empty);
        }
        let mut store = Self {
            triples,
            by_head_rel: BTreeMap::new(),
            by_tail_rel: BTreeMap::new(),
            by_head: BTreeMap::new(),
            tails: BTreeSet::new(),
            by_relation: BTreeMap::new(),
        };
        for (i, t) in store.triples.iter().enumerate() {
            let (h, r, tl) = (t.head().to_string(), t.relation().to_string(), t.tail().to_string());
            store.by_head_rel.entry((h.clone(), r.clone())).or_default().push(i);
            store.tails.insert(tl.clone());
            store.by_tail_rel.entry((tl, r.clone())).or_default().push(i);
            store.by_head.entry(h).or_default().push(i);
            store.by_relation.entry(r).or_default().push(i);
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// All triples in sorted order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn with_head(&self, head: &str) -> impl Iterator<Item = &Triple> + '_ {
        self.by_head.get(head).into_iter().flatten().map(|&i| &self.triples[i])
    }

    pub fn with_relation(&self, relation: &str) -> impl Iterator<Item = &Triple> + '_ {
        self.by_relation.get(relation).into_iter().flatten().map(|&i| &self.triples[i])
    }

    /// Sorted heads that carry `relation`.
    pub fn heads_with(&self, relation: &str) -> Vec<&str> {
        let set: BTreeSet<&str> = self.with_relation(relation).map(Triple::head).collect();
        set.into_iter().collect()
    }

    pub fn has(&self, head: &str, relation: &str) -> bool {
        self.by_head_rel.contains_key(&(head.to_string(), relation.to_string()))
    }

    /// Whether `entity` occurs as a head or a tail anywhere.
    pub fn mentions(&self, entity: &str) -> bool {
        self.by_head.contains_key(entity) || self.tails.contains(entity)
    }

    fn lookup<'a>(index: &'a BTreeMap<(String, String), Vec<usize>>, a: &str, b: &str) -> Option<&'a Vec<usize>> {
        index.get(&(a.to_string(), b.to_string()))
    }
}

impl TripleSource for TripleStore {
    fn outgoing(&self, head: &str, relation: &str) -> Vec<&Triple> {
        Self::lookup(&self.by_head_rel, head, relation).into_iter().flatten().map(|&i| &self.triples[i]).collect()
    }

    fn incoming(&self, tail: &str, relation: &str) -> Vec<&Triple> {
        Self::lookup(&self.by_tail_rel, tail, relation).into_iter().flatten().map(|&i| &self.triples[i]).collect()
    }
}
