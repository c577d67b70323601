use std::collections::BTreeMap;

use thiserror::Error;

use super::store::TripleStore;
use crate::model::{
    validate_structure, ConstraintViolation, EvidenceGraph, ExecError, FactId, GoldenProgram, NodeId, Triple,
    MAX_CHAINS,
};

/// Triples collected while executing a program: for each `Find` chain, one
/// trail of hop triples per surviving binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grounding {
    pub chains: Vec<Vec<Vec<Triple>>>,
    pub answer: String,
}

impl Grounding {
    /// Distinct triples in first-visit order.
    pub fn triples(&self) -> Vec<&Triple> {
        let mut seen = std::collections::BTreeSet::new();
        self.chains.iter().flatten().flatten().filter(|t| seen.insert(*t)).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundingError {
    #[error("entity {0:?} is not in the triple store")]
    UnknownEntity(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

pub fn ground_program(program: &GoldenProgram, store: &TripleStore) -> Result<Grounding, GroundingError> {
    if let Some(missing) = program.anchors().into_iter().find(|e| !store.mentions(e)) {
        return Err(GroundingError::UnknownEntity(missing.to_string()));
    }
    let exec = program.execute(store)?;
    let chains = exec
        .chains
        .into_iter()
        .map(|bindings| bindings.into_iter().map(|b| b.trail).filter(|t| !t.is_empty()).collect())
        .collect();
    Ok(Grounding { chains, answer: exec.answer })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GoldError {
    #[error("grounding produced no evidence")]
    NoEvidence,
    #[error("triple {0} has no fact")]
    Unplaced(Triple),
    #[error("{0} leaves exceed the chain limit")]
    TooManyLeaves(usize),
    #[error("gold graph violates constraints: {0:?}")]
    Invalid(Vec<ConstraintViolation>),
}

/// Links Q to the first hop of every trail and each hop to the next.
/// Consecutive hops housed in the same fact collapse into one node.
pub fn build_gold_graph(grounding: &Grounding, fact_of: &BTreeMap<Triple, FactId>) -> Result<EvidenceGraph, GoldError> {
    let mut g = EvidenceGraph::new();
    for trail in grounding.chains.iter().flatten() {
        let mut prev = NodeId::Root;
        for t in trail {
            let node = NodeId::Fact(*fact_of.get(t).ok_or_else(|| GoldError::Unplaced(t.clone()))?);
            if node != prev {
                g.add_edge(prev, node);
                prev = node;
            }
        }
    }
    if g.evidence_count() == 0 {
        return Err(GoldError::NoEvidence);
    }
    let violations = validate_structure(&g);
    if !violations.is_empty() {
        return Err(GoldError::Invalid(violations));
    }
    let leaves = g.nodes().iter().filter(|&&n| !n.is_root() && g.is_leaf(n)).count();
    if leaves > MAX_CHAINS {
        return Err(GoldError::TooManyLeaves(leaves));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{serialize_chains, structure_class_of, Direction, Op, Order, StructureClass};

    fn relate(r: &str) -> Op {
        Op::Relate { relation: r.into(), direction: Direction::Forward }
    }

    fn store() -> TripleStore {
        TripleStore::from_tsv(
            "Billings\tarea\t114.6\nJuneau\tarea\t8427.626992\nF\tdirector\tD\nD\tplace of birth\tJuneau\n\
             G\tdirector\tD\nG\tcast member\tA\nG\tcast member\tB\nA\tplace of birth\tJuneau\n",
        )
        .unwrap()
    }

    fn index(g: &Grounding) -> BTreeMap<Triple, FactId> {
        g.triples().into_iter().enumerate().map(|(i, t)| (t.clone(), FactId(i as u32 + 1))).collect()
    }

    #[test]
    fn comparison_grounds() {
        let p = GoldenProgram::new(vec![
            Op::Find { entity: "Billings".into() },
            relate("area"),
            Op::Find { entity: "Juneau".into() },
            relate("area"),
            Op::SelectBetween { attr: "area".into(), order: Order::Greater },
        ])
        .unwrap();
        let g = ground_program(&p, &store()).unwrap();
        assert_eq!(g.answer, "Juneau");
        let graph = build_gold_graph(&g, &index(&g)).unwrap();
        assert_eq!(serialize_chains(&graph), "Q-1;Q-2;");
        assert_eq!(structure_class_of(&graph).unwrap(), StructureClass::McSh);
    }

    #[test]
    fn query_and_count() {
        let q = GoldenProgram::new(vec![
            Op::Find { entity: "F".into() },
            relate("director"),
            relate("place of birth"),
            Op::Query,
        ])
        .unwrap();
        let g = ground_program(&q, &store()).unwrap();
        assert_eq!(g.answer, "Juneau");
        let graph = build_gold_graph(&g, &index(&g)).unwrap();
        assert_eq!(structure_class_of(&graph).unwrap(), StructureClass::ScMh);

        let c = GoldenProgram::new(vec![Op::Find { entity: "F".into() }, relate("genre"), Op::Count]).unwrap();
        let g = ground_program(&c, &store()).unwrap();
        assert_eq!(g.answer, "0");
        assert_eq!(build_gold_graph(&g, &index(&g)), Err(GoldError::NoEvidence));

        let missing =
            GoldenProgram::new(vec![Op::Find { entity: "Nowhere".into() }, relate("area"), Op::Query]).unwrap();
        assert!(matches!(ground_program(&missing, &store()), Err(GroundingError::UnknownEntity(_))));
    }

    #[test]
    fn shared_first_hop_has_out_degree_two() {
        let p = GoldenProgram::new(vec![
            Op::Find { entity: "G".into() },
            relate("cast member"),
            relate("place of birth"),
            Op::Count,
        ])
        .unwrap();
        let t = |h: &str, r: &str, x: &str| Triple::new(h, r, x).unwrap();
        // two trails through one fact: both cast triples bundled in fact 1
        let g = Grounding {
            chains: vec![vec![
                vec![t("G", "cast member", "A"), t("A", "place of birth", "Juneau")],
                vec![t("G", "cast member", "B"), t("B", "place of birth", "Billings")],
            ]],
            answer: "2".into(),
        };
        let idx: BTreeMap<Triple, FactId> = [
            (t("G", "cast member", "A"), FactId(1)),
            (t("G", "cast member", "B"), FactId(1)),
            (t("A", "place of birth", "Juneau"), FactId(2)),
            (t("B", "place of birth", "Billings"), FactId(3)),
        ]
        .into_iter()
        .collect();
        let graph = build_gold_graph(&g, &idx).unwrap();
        assert_eq!(serialize_chains(&graph), "Q-1-2;Q-1-3;");
        assert_eq!(graph.out_degree(NodeId::fact(1)), 2);
        // on the real store only A has a birthplace
        assert_eq!(ground_program(&p, &store()).unwrap().answer, "1");
    }

    #[test]
    fn two_chains_two_hops() {
        let t = |h: &str, r: &str, x: &str| Triple::new(h, r, x).unwrap();
        let g = Grounding {
            chains: vec![
                vec![vec![t("a", "r", "b"), t("b", "s", "1")]],
                vec![vec![t("c", "r", "d"), t("d", "s", "2")]],
            ],
            answer: "x".into(),
        };
        let graph = build_gold_graph(&g, &index(&g)).unwrap();
        assert_eq!(graph.evidence_count(), 4);
        assert_eq!(graph.edges().len(), 4);
        assert_eq!(structure_class_of(&graph).unwrap(), StructureClass::McMh);
    }

    #[test]
    fn too_many_leaves_rejected() {
        let t = |i: u32| Triple::new("a", "r", i.to_string()).unwrap();
        let g = Grounding { chains: vec![(0..4).map(|i| vec![t(i)]).collect()], answer: "4".into() };
        assert_eq!(build_gold_graph(&g, &index(&g)), Err(GoldError::TooManyLeaves(4)));
    }
}
