//! Golden programs: the operation sequence that grounds a question to
//! knowledge triples, and its executor.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Triple;

/// Most chains a program may open.
pub const MAX_CHAINS: usize = 3;
/// Most triple-consuming steps per chain.
pub const MAX_HOPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Follow `(current, relation, x)` to `x`.
    Forward,
    /// Follow `(x, relation, current)` to `x`.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Greater,
    Less,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum Op {
    Find {
        entity: String,
    },
    Relate {
        relation: String,
        direction: Direction,
    },
    /// Keeps bindings that carry `attr`; the attribute triple joins the chain.
    FilterAttr {
        attr: String,
    },
    Query,
    SelectBetween {
        attr: String,
        order: Order,
    },
    Count,
    VerifyBool {
        expected: String,
    },
    QueryAttrQualifier {
        attr: String,
        qualifier: String,
    },
}

impl Op {
    fn is_terminal(&self) -> bool {
        matches!(
            self,
            Op::Query | Op::SelectBetween { .. } | Op::Count | Op::VerifyBool { .. } | Op::QueryAttrQualifier { .. }
        )
    }

    fn is_step(&self) -> bool {
        matches!(self, Op::Relate { .. } | Op::FilterAttr { .. })
    }
}

/// Relation under which the qualifier of an `(entity, attr, value)`
/// statement is stored.
pub fn qualifier_relation(attr: &str, qualifier: &str) -> String {
    format!("{attr} ({qualifier})")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("program is empty")]
    Empty,
    #[error("program must open with Find")]
    MissingFind,
    #[error("program must end with exactly one terminal operation")]
    MissingTerminal,
    #[error("terminal operation at position {0} is not last")]
    TerminalNotLast(usize),
    #[error("{op} takes {expected} chain(s), program has {found}")]
    ChainArity { op: &'static str, expected: &'static str, found: usize },
    #[error("chain {0} has no hop before the terminal operation")]
    EmptyChain(usize),
    #[error("chain {chain} has {hops} hops, at most {MAX_HOPS} allowed")]
    TooManyHops { chain: usize, hops: usize },
    #[error("compared chain {chain} ends with {found:?}, expected {attr:?}")]
    AttrMismatch { chain: usize, attr: String, found: String },
}

/// A well-formed operation sequence: `Find` opens each chain, `Relate` and
/// `FilterAttr` extend it, one terminal op closes the program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Op>", into = "Vec<Op>")]
pub struct GoldenProgram {
    ops: Vec<Op>,
}

impl TryFrom<Vec<Op>> for GoldenProgram {
    type Error = ProgramError;

    fn try_from(ops: Vec<Op>) -> Result<Self, Self::Error> {
        GoldenProgram::new(ops)
    }
}

impl From<GoldenProgram> for Vec<Op> {
    fn from(p: GoldenProgram) -> Self {
        p.ops
    }
}

struct ChainSpec<'a> {
    entity: &'a str,
    steps: Vec<&'a Op>,
}

impl GoldenProgram {
    pub fn new(ops: Vec<Op>) -> Result<Self, ProgramError> {
        let program = Self { ops };
        program.check()?;
        Ok(program)
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn terminal(&self) -> &Op {
        self.ops.last().expect("validated program is non-empty")
    }

    fn chains(&self) -> Vec<ChainSpec<'_>> {
        let mut chains: Vec<ChainSpec<'_>> = Vec::new();
        for op in &self.ops {
            match op {
                Op::Find { entity } => chains.push(ChainSpec { entity, steps: Vec::new() }),
                op if op.is_step() => {
                    if let Some(c) = chains.last_mut() {
                        c.steps.push(op)
                    }
                }
                _ => {}
            }
        }
        chains
    }

    fn check(&self) -> Result<(), ProgramError> {
        let first = self.ops.first().ok_or(ProgramError::Empty)?;
        if !matches!(first, Op::Find { .. }) {
            return Err(ProgramError::MissingFind);
        }
        if let Some(pos) = self.ops.iter().position(Op::is_terminal) {
            if pos + 1 != self.ops.len() {
                return Err(ProgramError::TerminalNotLast(pos));
            }
        } else {
            return Err(ProgramError::MissingTerminal);
        }
        let chains = self.chains();
        let terminal = self.terminal();
        let (name, single) = match terminal {
            Op::Query => ("Query", true),
            Op::Count => ("Count", true),
            Op::VerifyBool { .. } => ("VerifyBool", true),
            Op::QueryAttrQualifier { .. } => ("QueryAttrQualifier", true),
            _ => ("SelectBetween", false),
        };
        if single && chains.len() != 1 {
            return Err(ProgramError::ChainArity { op: name, expected: "1", found: chains.len() });
        }
        if !single && !(2..=MAX_CHAINS).contains(&chains.len()) {
            return Err(ProgramError::ChainArity { op: name, expected: "2..=3", found: chains.len() });
        }
        let qualifier_hop = usize::from(matches!(terminal, Op::QueryAttrQualifier { .. }));
        for (i, c) in chains.iter().enumerate() {
            if c.steps.is_empty() && qualifier_hop == 0 {
                return Err(ProgramError::EmptyChain(i));
            }
            let hops = c.steps.len() + qualifier_hop;
            if hops > MAX_HOPS {
                return Err(ProgramError::TooManyHops { chain: i, hops });
            }
            if let Op::SelectBetween { attr, .. } = terminal {
                let found = match c.steps.last() {
                    Some(Op::Relate { relation, .. }) => relation,
                    Some(Op::FilterAttr { attr }) => attr,
                    _ => unreachable!("non-empty chain ends with a step"),
                };
                if found != attr {
                    return Err(ProgramError::AttrMismatch { chain: i, attr: attr.clone(), found: found.clone() });
                }
            }
        }
        Ok(())
    }

    /// Entities named by `Find`, in program order.
    pub fn anchors(&self) -> Vec<&str> {
        self.chains().into_iter().map(|c| c.entity).collect()
    }

    /// Every relation the program can match, qualifier relations included.
    pub fn relations(&self) -> BTreeSet<String> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::Relate { relation, .. } => Some(relation.clone()),
                Op::FilterAttr { attr } => Some(attr.clone()),
                Op::QueryAttrQualifier { attr, qualifier } => Some(qualifier_relation(attr, qualifier)),
                _ => None,
            })
            .collect()
    }

    /// Runs the program over `source`.
    pub fn execute(&self, source: &impl TripleSource) -> Result<Execution, ExecError> {
        let terminal = self.terminal();
        let mut chains = Vec::new();
        for (ci, spec) in self.chains().iter().enumerate() {
            let mut bindings =
                vec![Binding { anchor: spec.entity.to_string(), value: spec.entity.to_string(), trail: vec![] }];
            for (si, step) in spec.steps.iter().enumerate() {
                bindings = apply_step(step, bindings, source);
                if bindings.is_empty() {
                    if matches!(terminal, Op::Count) {
                        break;
                    }
                    return Err(ExecError::MissingEvidence { chain: ci, step: si });
                }
            }
            chains.push(bindings);
        }
        let answer = match terminal {
            Op::Query => single_value(&chains[0])?.to_string(),
            Op::Count => {
                let values: BTreeSet<&str> = chains[0].iter().map(|b| b.value.as_str()).collect();
                values.len().to_string()
            }
            Op::VerifyBool { expected } => {
                if chains[0].is_empty() {
                    return Err(ExecError::MissingEvidence { chain: 0, step: 0 });
                }
                let hit = chains[0].iter().any(|b| same_value(&b.value, expected));
                if hit { "yes" } else { "no" }.to_string()
            }
            Op::QueryAttrQualifier { attr, qualifier } => {
                let entity = single_value(&chains[0])?.to_string();
                let rel = qualifier_relation(attr, qualifier);
                let found = source.outgoing(&entity, &rel);
                let triple =
                    found.first().ok_or(ExecError::MissingEvidence { chain: 0, step: self.chains()[0].steps.len() })?;
                let value = triple.tail().to_string();
                chains[0][0].trail.push((*triple).clone());
                chains[0].truncate(1);
                value
            }
            Op::SelectBetween { order, .. } => select_between(&chains, *order)?,
            Op::Find { .. } | Op::Relate { .. } | Op::FilterAttr { .. } => {
                unreachable!("validated program ends with a terminal op")
            }
        };
        Ok(Execution { chains, answer })
    }
}

fn apply_step(step: &Op, bindings: Vec<Binding>, source: &impl TripleSource) -> Vec<Binding> {
    let mut out = Vec::new();
    for b in bindings {
        match step {
            Op::Relate { relation, direction } => {
                let found = match direction {
                    Direction::Forward => source.outgoing(&b.value, relation),
                    Direction::Backward => source.incoming(&b.value, relation),
                };
                for t in found {
                    let value = match direction {
                        Direction::Forward => t.tail(),
                        Direction::Backward => t.head(),
                    };
                    let mut trail = b.trail.clone();
                    trail.push(t.clone());
                    out.push(Binding { anchor: b.anchor.clone(), value: value.to_string(), trail });
                }
            }
            Op::FilterAttr { attr } => {
                if let Some(t) = source.outgoing(&b.value, attr).first() {
                    let mut b = b;
                    b.trail.push((*t).clone());
                    out.push(b);
                }
            }
            _ => unreachable!("only Relate and FilterAttr are steps"),
        }
    }
    out
}

fn single_value(bindings: &[Binding]) -> Result<&str, ExecError> {
    let values: BTreeSet<&str> = bindings.iter().map(|b| b.value.as_str()).collect();
    match values.len() {
        0 => Err(ExecError::MissingEvidence { chain: 0, step: 0 }),
        1 => Ok(values.into_iter().next().unwrap_or_default()),
        n => Err(ExecError::Ambiguous { chain: 0, values: n }),
    }
}

fn select_between(chains: &[Vec<Binding>], order: Order) -> Result<String, ExecError> {
    let mut best: Option<(f64, &str)> = None;
    let mut tie = false;
    for (ci, bindings) in chains.iter().enumerate() {
        let b = match bindings.as_slice() {
            [b] => b,
            [] => return Err(ExecError::MissingEvidence { chain: ci, step: 0 }),
            many => return Err(ExecError::Ambiguous { chain: ci, values: many.len() }),
        };
        let last = b.trail.last().ok_or(ExecError::MissingEvidence { chain: ci, step: 0 })?;
        let v = last.magnitude().ok_or_else(|| ExecError::NotNumeric(last.tail().to_string()))?;
        let subject = last.head();
        match best {
            None => best = Some((v, subject)),
            Some((bv, _)) if v == bv => tie = true,
            Some((bv, _)) => {
                let better = match order {
                    Order::Greater => v > bv,
                    Order::Less => v < bv,
                };
                if better {
                    best = Some((v, subject));
                    tie = false;
                }
            }
        }
    }
    if tie {
        return Err(ExecError::Tie);
    }
    Ok(best.map(|(_, s)| s.to_string()).unwrap_or_default())
}

fn same_value(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

/// Lookup interface the executor runs against: a full triple store while
/// grounding, the retrieved evidence while reading. Results are sorted.
pub trait TripleSource {
    fn outgoing(&self, head: &str, relation: &str) -> Vec<&Triple>;
    fn incoming(&self, tail: &str, relation: &str) -> Vec<&Triple>;
}

/// A plain set of triples, scanned linearly.
#[derive(Debug, Clone, Default)]
pub struct TripleSet(BTreeSet<Triple>);

impl TripleSet {
    pub fn new(triples: impl IntoIterator<Item = Triple>) -> Self {
        Self(triples.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TripleSource for TripleSet {
    fn outgoing(&self, head: &str, relation: &str) -> Vec<&Triple> {
        self.0.iter().filter(|t| t.head() == head && t.relation() == relation).collect()
    }

    fn incoming(&self, tail: &str, relation: &str) -> Vec<&Triple> {
        self.0.iter().filter(|t| t.tail() == tail && t.relation() == relation).collect()
    }
}

/// A chain value together with the triples that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub anchor: String,
    pub value: String,
    pub trail: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    /// Final bindings per `Find` chain, in program order.
    pub chains: Vec<Vec<Binding>>,
    pub answer: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("no evidence for step {step} of chain {chain}")]
    MissingEvidence { chain: usize, step: usize },
    #[error("chain {chain} yields {values} values where one is required")]
    Ambiguous { chain: usize, values: usize },
    #[error("value {0:?} is not numeric")]
    NotNumeric(String),
    #[error("compared values tie")]
    Tie,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: &str, r: &str, tail: &str) -> Triple {
        Triple::new(h, r, tail).unwrap()
    }

    fn find(e: &str) -> Op {
        Op::Find { entity: e.into() }
    }

    fn rel(r: &str) -> Op {
        Op::Relate { relation: r.into(), direction: Direction::Forward }
    }

    #[test]
    fn well_formedness() {
        assert_eq!(GoldenProgram::new(vec![]), Err(ProgramError::Empty));
        assert_eq!(GoldenProgram::new(vec![rel("a"), Op::Query]), Err(ProgramError::MissingFind));
        assert_eq!(GoldenProgram::new(vec![find("x"), rel("a")]), Err(ProgramError::MissingTerminal));
        assert_eq!(GoldenProgram::new(vec![find("x"), Op::Count, rel("a")]), Err(ProgramError::TerminalNotLast(1)));
        assert!(matches!(
            GoldenProgram::new(vec![find("x"), rel("a"), find("y"), rel("a"), Op::Query]),
            Err(ProgramError::ChainArity { .. })
        ));
        assert_eq!(GoldenProgram::new(vec![find("x"), Op::Query]), Err(ProgramError::EmptyChain(0)));
        assert!(matches!(
            GoldenProgram::new(vec![
                find("x"),
                rel("area"),
                find("y"),
                rel("population"),
                Op::SelectBetween { attr: "area".into(), order: Order::Greater }
            ]),
            Err(ProgramError::AttrMismatch { chain: 1, .. })
        ));
        let deep = vec![find("x"), rel("a"), rel("b"), rel("c"), rel("d"), rel("e"), Op::Query];
        assert!(matches!(GoldenProgram::new(deep), Err(ProgramError::TooManyHops { .. })));
        // qualifier-only chain is fine
        assert!(GoldenProgram::new(vec![
            find("x"),
            Op::QueryAttrQualifier { attr: "population".into(), qualifier: "point in time".into() }
        ])
        .is_ok());
    }

    #[test]
    fn select_between_picks_the_larger_area() {
        let src = TripleSet::new([t("Billings", "area", "113.467037"), t("Juneau", "area", "8427.626992")]);
        let p = GoldenProgram::new(vec![
            find("Billings"),
            rel("area"),
            find("Juneau"),
            rel("area"),
            Op::SelectBetween { attr: "area".into(), order: Order::Greater },
        ])
        .unwrap();
        assert_eq!(p.execute(&src).unwrap().answer, "Juneau");
    }

    #[test]
    fn count_over_nothing_is_zero() {
        let src = TripleSet::new([t("A", "director", "B")]);
        let p = GoldenProgram::new(vec![
            find("Nobody"),
            Op::Relate { relation: "director".into(), direction: Direction::Backward },
            Op::Count,
        ])
        .unwrap();
        let ex = p.execute(&src).unwrap();
        assert_eq!(ex.answer, "0");
        assert!(ex.chains[0].is_empty());
    }

    #[test]
    fn serde_shape_and_validation() {
        let p = GoldenProgram::new(vec![find("X"), rel("r"), Op::Query]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"[{"op":"Find","entity":"X"},{"op":"Relate","relation":"r","direction":"forward"},{"op":"Query"}]"#
        );
        assert_eq!(serde_json::from_str::<GoldenProgram>(&json).unwrap(), p);
        assert!(serde_json::from_str::<GoldenProgram>(r#"[{"op":"Query"}]"#).is_err());
    }
}
