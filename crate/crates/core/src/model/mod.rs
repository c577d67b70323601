//! Domain types shared by every stage: triples, facts, textual databases,
//! evidence graphs and QA instances.

mod chains;
mod dataset;
mod graph;
mod program;

pub use chains::{parse_chains, serialize_chains, ChainParseError, ChainParseErrorKind};
pub use dataset::{read_dataset, read_instance, write_dataset, write_instance, DatasetError};
pub use graph::{
    structure_class_of, validate_graph, validate_structure, ConstraintViolation, Edge, EvidenceGraph, GraphError,
};
pub use program::{
    qualifier_relation, Binding, Direction, ExecError, Execution, GoldenProgram, Op, Order, ProgramError, TripleSet,
    TripleSource, MAX_CHAINS, MAX_HOPS,
};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("triple has an empty {0}")]
    EmptyTripleField(&'static str),
    #[error("fact {0} has empty text")]
    EmptyText(FactId),
    #[error("gold fact {0} has no provenance")]
    MissingProvenance(FactId),
    #[error("fact {0} carries {1} provenance triples, at most 3 allowed")]
    TooManyTriples(FactId, usize),
    #[error("fact {id}: bundled triple head {found:?} differs from {expected:?}")]
    MixedHeads { id: FactId, expected: String, found: String },
    #[error("duplicate fact id {0}")]
    DuplicateFact(FactId),
    #[error("unknown {kind} {value:?}")]
    UnknownName { kind: &'static str, value: String },
}

/// Identifier of a fact inside one textual database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A node of an evidence graph. `Root` is the question sentinel `Q`, which
/// sorts before every fact and can never collide with a fact id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Root,
    Fact(FactId),
}

impl NodeId {
    pub fn fact(id: u32) -> Self {
        NodeId::Fact(FactId(id))
    }

    pub fn as_fact(self) -> Option<FactId> {
        match self {
            NodeId::Root => None,
            NodeId::Fact(id) => Some(id),
        }
    }

    pub fn is_root(self) -> bool {
        matches!(self, NodeId::Root)
    }
}

impl From<FactId> for NodeId {
    fn from(id: FactId) -> Self {
        NodeId::Fact(id)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Root => f.write_str("Q"),
            NodeId::Fact(id) => write!(f, "{id}"),
        }
    }
}

/// A `(head, relation, tail)` knowledge fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[String; 3]", into = "[String; 3]")]
pub struct Triple {
    head: String,
    relation: String,
    tail: String,
}

impl Triple {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let (head, relation, tail) = (head.into(), relation.into(), tail.into());
        for (name, v) in [("head", &head), ("relation", &relation), ("tail", &tail)] {
            if v.trim().is_empty() {
                return Err(ModelError::EmptyTripleField(name));
            }
        }
        Ok(Self { head, relation, tail })
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn tail(&self) -> &str {
        &self.tail
    }

    /// Numeric magnitude of the tail, if it starts with a number
    /// (`"171.128084"`, `"+107 minutes"`, `"142 metres"`).
    pub fn magnitude(&self) -> Option<f64> {
        parse_magnitude(&self.tail)
    }
}

impl TryFrom<[String; 3]> for Triple {
    type Error = ModelError;

    fn try_from([h, r, t]: [String; 3]) -> Result<Self, Self::Error> {
        Triple::new(h, r, t)
    }
}

impl From<Triple> for [String; 3] {
    fn from(t: Triple) -> Self {
        [t.head, t.relation, t.tail]
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

pub(crate) fn parse_magnitude(s: &str) -> Option<f64> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    let end = s
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || (c == '-' && i == 0)))
        .map_or(s.len(), |(i, _)| i);
    let num = &s[..end];
    if num.is_empty() || !num.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    // "2014-03-08" is a date, not a magnitude
    if s[end..].starts_with('-') {
        return None;
    }
    num.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistractorKind {
    /// Lexically close to the question.
    Semantic,
    /// Shares a head entity with a gold fact but uses another relation.
    SameHead,
    Random,
}

impl DistractorKind {
    pub const ALL: [DistractorKind; 3] = [DistractorKind::Semantic, DistractorKind::SameHead, DistractorKind::Random];
}

/// One evidence sentence of a textual database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub text: String,
    pub is_distractor: bool,
    pub distractor_kind: Option<DistractorKind>,
    pub provenance: Vec<Triple>,
}

impl Fact {
    /// Checks the per-fact invariants: non-empty text, 1..=3 provenance
    /// triples for gold facts, bundled triples sharing the first head.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyText(self.id));
        }
        if self.provenance.is_empty() && !self.is_distractor {
            return Err(ModelError::MissingProvenance(self.id));
        }
        if self.provenance.len() > 3 {
            return Err(ModelError::TooManyTriples(self.id, self.provenance.len()));
        }
        if let Some(first) = self.provenance.first() {
            if let Some(other) = self.provenance.iter().find(|t| t.head != first.head) {
                return Err(ModelError::MixedHeads {
                    id: self.id,
                    expected: first.head.clone(),
                    found: other.head.clone(),
                });
            }
        }
        Ok(())
    }
}

/// An id-addressed collection of facts.
#[derive(Debug, Clone, PartialEq)]
pub struct TextualDatabase {
    facts: Vec<Fact>,
    index: HashMap<FactId, usize>,
}

impl TextualDatabase {
    pub fn new(facts: Vec<Fact>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(facts.len());
        for (pos, fact) in facts.iter().enumerate() {
            fact.check()?;
            if index.insert(fact.id, pos).is_some() {
                return Err(ModelError::DuplicateFact(fact.id));
            }
        }
        Ok(Self { facts, index })
    }

    pub fn get(&self, id: FactId) -> Option<&Fact> {
        self.index.get(&id).map(|&pos| &self.facts[pos])
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FactId> + '_ {
        self.facts.iter().map(|f| f.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionType {
    Query,
    Comparison,
    Count,
    Bool,
    Qualifier,
}

impl QuestionType {
    pub const ALL: [QuestionType; 5] = [
        QuestionType::Query,
        QuestionType::Comparison,
        QuestionType::Count,
        QuestionType::Bool,
        QuestionType::Qualifier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Query => "query",
            QuestionType::Comparison => "comparison",
            QuestionType::Count => "count",
            QuestionType::Bool => "bool",
            QuestionType::Qualifier => "qualifier",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Single/multi chain crossed with single/multi hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StructureClass {
    #[serde(rename = "SC-SH")]
    ScSh,
    #[serde(rename = "SC-MH")]
    ScMh,
    #[serde(rename = "MC-SH")]
    McSh,
    #[serde(rename = "MC-MH")]
    McMh,
}

impl StructureClass {
    pub const ALL: [StructureClass; 4] =
        [StructureClass::ScSh, StructureClass::ScMh, StructureClass::McSh, StructureClass::McMh];

    pub fn new(multi_chain: bool, multi_hop: bool) -> Self {
        match (multi_chain, multi_hop) {
            (false, false) => StructureClass::ScSh,
            (false, true) => StructureClass::ScMh,
            (true, false) => StructureClass::McSh,
            (true, true) => StructureClass::McMh,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureClass::ScSh => "SC-SH",
            StructureClass::ScMh => "SC-MH",
            StructureClass::McSh => "MC-SH",
            StructureClass::McMh => "MC-MH",
        }
    }

    pub fn is_multi_chain(self) -> bool {
        matches!(self, StructureClass::McSh | StructureClass::McMh)
    }

    pub fn is_multi_hop(self) -> bool {
        matches!(self, StructureClass::ScMh | StructureClass::McMh)
    }
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StructureClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownName { kind: "structure class", value: s.into() })
    }
}

/// A question with its answer, gold evidence graph, program and database.
#[derive(Debug, Clone, PartialEq)]
pub struct QaInstance {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub gold_graph: EvidenceGraph,
    pub program: GoldenProgram,
    pub question_type: QuestionType,
    pub structure_class: StructureClass,
    pub database: TextualDatabase,
}

impl QaInstance {
    /// Fact ids of the gold graph, root excluded.
    pub fn gold_ids(&self) -> std::collections::BTreeSet<FactId> {
        self.gold_graph.fact_ids().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(id: u32, prov: Vec<Triple>) -> Fact {
        Fact { id: FactId(id), text: "x".into(), is_distractor: false, distractor_kind: None, provenance: prov }
    }

    #[test]
    fn magnitude_parsing() {
        let t = |tail: &str| Triple::new("a", "b", tail).unwrap().magnitude();
        assert_eq!(t("171.128084"), Some(171.128084));
        assert_eq!(t("+107 minutes"), Some(107.0));
        assert_eq!(t("142 metres"), Some(142.0));
        assert_eq!(t("2014-03-08"), None);
        assert_eq!(t("Juneau"), None);
    }

    #[test]
    fn triple_rejects_empty_fields() {
        assert_eq!(Triple::new("a", " ", "c"), Err(ModelError::EmptyTripleField("relation")));
        let parsed: Result<Triple, _> = serde_json::from_str(r#"["a","b",""]"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn database_rejects_duplicate_ids() {
        let t = Triple::new("a", "r", "b").unwrap();
        let err = TextualDatabase::new(vec![fact(1, vec![t.clone()]), fact(1, vec![t])]);
        assert_eq!(err.unwrap_err(), ModelError::DuplicateFact(FactId(1)));
    }

    #[test]
    fn bundled_triples_share_head() {
        let a = Triple::new("a", "r", "b").unwrap();
        let b = Triple::new("z", "r", "b").unwrap();
        assert!(matches!(fact(0, vec![a, b]).check(), Err(ModelError::MixedHeads { .. })));
        assert_eq!(fact(0, vec![]).check(), Err(ModelError::MissingProvenance(FactId(0))));
    }

    #[test]
    fn root_sorts_first() {
        assert!(NodeId::Root < NodeId::fact(0));
        assert_eq!(NodeId::Root.to_string(), "Q");
        assert_eq!("mc-mh".parse::<StructureClass>().unwrap(), StructureClass::McMh);
    }
}
