use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use super::store::TripleStore;
use super::verbalize::verbalize;
use crate::model::{DistractorKind, Fact, FactId, GoldenProgram, Triple};
use crate::scorers::tokenize;
use crate::seed;

/// Token sets of every store triple, computed once per store.
#[derive(Debug, Clone)]
pub struct Lexicon {
    tokens: Vec<BTreeSet<String>>,
}

impl Lexicon {
    pub fn new(store: &TripleStore) -> Self {
        let tokens = store
            .triples()
            .iter()
            .map(|t| tokenize(&format!("{} {} {}", t.head(), t.relation(), t.tail())).into_iter().collect())
            .collect();
        Self { tokens }
    }
}

/// Per-category counts for `n` distractors: thirds, remainder going to
/// the first categories.
pub fn category_counts(n: usize) -> [usize; 3] {
    let (base, rem) = (n / 3, n % 3);
    [base + usize::from(rem > 0), base + usize::from(rem > 1), base]
}

#[derive(Debug, Clone)]
pub struct Distractors {
    pub facts: Vec<Fact>,
    /// Same-head slots that had to be filled with random facts.
    pub backfilled: usize,
}

/// Triples a distractor must never carry: any gold provenance, and any
/// triple the program could match from an entity the gold evidence
/// touches (it would change the answer read off the database).
fn excluded(t: &Triple, gold: &BTreeSet<&Triple>, relations: &BTreeSet<String>, touched: &BTreeSet<&str>) -> bool {
    gold.contains(t) || (relations.contains(t.relation()) && (touched.contains(t.head()) || touched.contains(t.tail())))
}

pub fn inject_distractors(
    question: &str,
    program: &GoldenProgram,
    gold: &[Fact],
    store: &TripleStore,
    lexicon: &Lexicon,
    n: usize,
    base_seed: u64,
) -> Distractors {
    let gold_triples: BTreeSet<&Triple> = gold.iter().flat_map(|f| &f.provenance).collect();
    let relations = program.relations();
    let mut touched: BTreeSet<&str> = program.anchors().into_iter().collect();
    for t in &gold_triples {
        touched.insert(t.head());
        touched.insert(t.tail());
    }
    let allowed: Vec<usize> =
        (0..store.len()).filter(|&i| !excluded(&store.triples()[i], &gold_triples, &relations, &touched)).collect();
    let mut taken = BTreeSet::new();
    let [n_semantic, n_same_head, n_random] = category_counts(n);
    let mut picks: Vec<(usize, DistractorKind)> = Vec::with_capacity(n);

    // headed by an entity of the gold evidence, with a relation the gold
    // evidence never uses on that head
    let used: BTreeSet<(&str, &str)> = gold_triples.iter().map(|t| (t.head(), t.relation())).collect();
    let mut same_head: Vec<usize> = allowed
        .iter()
        .copied()
        .filter(|&i| {
            let t = &store.triples()[i];
            touched.contains(t.head()) && !used.contains(&(t.head(), t.relation()))
        })
        .collect();
    same_head.shuffle(&mut seed::rng(base_seed, &[1]));
    for &i in same_head.iter().take(n_same_head) {
        taken.insert(i);
        picks.push((i, DistractorKind::SameHead));
    }
    let backfilled = n_same_head - picks.len();
    if backfilled > 0 {
        tracing::debug!(backfilled, "too few same-head triples; filling from random");
    }

    // highest lexical overlap with the question; seeded tie-break
    let q: BTreeSet<String> = tokenize(question).into_iter().collect();
    let mut semantic: Vec<(usize, u64, usize)> = allowed
        .iter()
        .copied()
        .filter(|i| !taken.contains(i))
        .map(|i| (lexicon.tokens[i].intersection(&q).count(), seed::mix(base_seed, &[2, i as u64]), i))
        .collect();
    semantic.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, _, i) in semantic.iter().take(n_semantic) {
        taken.insert(i);
        picks.push((i, DistractorKind::Semantic));
    }

    let mut random: Vec<usize> = allowed.into_iter().filter(|i| !taken.contains(i)).collect();
    random.shuffle(&mut seed::rng(base_seed, &[3]));
    for &i in random.iter().take(n_random + backfilled) {
        picks.push((i, DistractorKind::Random));
    }

    let facts = picks
        .into_iter()
        .map(|(i, kind)| {
            let t = store.triples()[i].clone();
            let text = verbalize(std::slice::from_ref(&t), seed::mix(base_seed, &[4, i as u64]))
                .expect("single triple verbalizes");
            Fact { id: FactId(0), text, is_distractor: true, distractor_kind: Some(kind), provenance: vec![t] }
        })
        .collect();
    Distractors { facts, backfilled }
}
