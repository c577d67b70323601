//! Bidirectional subgraph fusion: keep the backward graph unless the
//! forward and backward edge sets agree by more than `gamma`, in which case
//! the two graphs are combined.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{bsc, graph_match, set_metrics};
use crate::model::{EvidenceGraph, FactId};

pub const DEFAULT_GAMMA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FuseMode {
    #[default]
    Union,
    Intersection,
}

impl FromStr for FuseMode {
    type Err = FuseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "union" => Ok(FuseMode::Union),
            "intersection" => Ok(FuseMode::Intersection),
            other => Err(FuseError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for FuseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FuseMode::Union => "union",
            FuseMode::Intersection => "intersection",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuseError {
    #[error("gamma {0} is outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("gamma grid is empty")]
    EmptyGrid,
    #[error("unknown fuse mode {0:?}; expected union or intersection")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Union,
    Intersection,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseOutcome {
    pub graph: EvidenceGraph,
    pub branch: Branch,
    pub bsc: f64,
    /// Some forward edge had to be dropped to keep the union acyclic.
    pub cycle_repaired: bool,
    /// The union gave a node already in the backward graph an extra
    /// parent, which a one-parent-per-node reading of the dedup rule would
    /// have refused.
    pub dedup_ambiguous: bool,
}

pub fn check_gamma(gamma: f64) -> Result<(), FuseError> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(FuseError::GammaOutOfRange(gamma))
    }
}

pub fn fuse(
    forward: &EvidenceGraph,
    backward: &EvidenceGraph,
    gamma: f64,
    mode: FuseMode,
) -> Result<FuseOutcome, FuseError> {
    check_gamma(gamma)?;
    let consistency = bsc(forward, backward);
    let mut out = FuseOutcome {
        graph: backward.clone(),
        branch: Branch::Backward,
        bsc: consistency,
        cycle_repaired: false,
        dedup_ambiguous: false,
    };
    if consistency <= gamma {
        return Ok(out);
    }
    match mode {
        FuseMode::Union => {
            out.branch = Branch::Union;
            for &node in forward.nodes() {
                out.graph.add_node(node);
            }
            for &(a, b) in forward.edges() {
                if out.graph.contains_edge(a, b) {
                    continue;
                }
                if out.graph.contains_node(b) && out.graph.reaches(b, a) {
                    out.cycle_repaired = true;
                    continue;
                }
                out.dedup_ambiguous |= backward.contains_node(b);
                out.graph.add_edge(a, b);
            }
            if out.cycle_repaired {
                out.graph.prune_unreachable();
            }
        }
        FuseMode::Intersection => {
            out.branch = Branch::Intersection;
            let common = forward.edges().intersection(backward.edges()).copied();
            out.graph = EvidenceGraph::from_edges(common);
            out.graph.prune_unreachable();
        }
    }
    Ok(out)
}

/// One instance's retrieved graphs, computed once and reused for every
/// gamma of a sweep.
#[derive(Debug, Clone)]
pub struct SweepInput {
    pub forward: EvidenceGraph,
    pub backward: EvidenceGraph,
    pub gold: EvidenceGraph,
}

/// Aggregate evidence-set F1 and graph match, both in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub f1: f64,
    pub gm: f64,
}

pub fn gamma_sweep(inputs: &[SweepInput], grid: &[f64], mode: FuseMode) -> Result<Vec<SweepRow>, FuseError> {
    if grid.is_empty() {
        return Err(FuseError::EmptyGrid);
    }
    for &g in grid {
        check_gamma(g)?;
    }
    grid.iter()
        .map(|&gamma| {
            let (mut f1, mut gm) = (0.0, 0.0);
            for inp in inputs {
                let fused = fuse(&inp.forward, &inp.backward, gamma, mode)?.graph;
                f1 += evidence_f1(&fused, &inp.gold);
                gm += f64::from(u8::from(graph_match(&fused, &inp.gold)));
            }
            let n = inputs.len().max(1) as f64;
            Ok(SweepRow { gamma, f1: 100.0 * f1 / n, gm: 100.0 * gm / n })
        })
        .collect()
}

fn evidence_f1(pred: &EvidenceGraph, gold: &EvidenceGraph) -> f64 {
    let p: std::collections::BTreeSet<FactId> = pred.fact_ids().collect();
    let g: std::collections::BTreeSet<FactId> = gold.fact_ids().collect();
    set_metrics(&p, &g).f1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_structure, NodeId};
    use proptest::prelude::*;

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }
    fn g(edges: &[(NodeId, NodeId)]) -> EvidenceGraph {
        EvidenceGraph::from_edges(edges.iter().copied())
    }

    #[test]
    fn identical_graphs_fuse_to_themselves() {
        let a = g(&[(Q, n(1)), (n(1), n(2))]);
        for gamma in [0.0, 0.2, 0.99] {
            assert_eq!(fuse(&a, &a, gamma, FuseMode::Union).unwrap().graph, a);
        }
    }

    #[test]
    fn disjoint_graphs_keep_backward() {
        let f = g(&[(Q, n(1))]);
        let b = g(&[(Q, n(2))]);
        let out = fuse(&f, &b, 0.2, FuseMode::Union).unwrap();
        assert_eq!(out.branch, Branch::Backward);
        assert_eq!(out.graph, b);
    }

    #[test]
    fn partial_overlap_takes_the_union() {
        // common {Q->a}; union {Q->a, a->b, a->c}: BSC = 1/3 > 0.2
        let f = g(&[(Q, n(1)), (n(1), n(2))]);
        let b = g(&[(Q, n(1)), (n(1), n(3))]);
        let out = fuse(&f, &b, 0.2, FuseMode::Union).unwrap();
        assert!((out.bsc - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(out.graph, g(&[(Q, n(1)), (n(1), n(2)), (n(1), n(3))]));
        assert!(!out.dedup_ambiguous);

        let inter = fuse(&f, &b, 0.2, FuseMode::Intersection).unwrap();
        assert_eq!(inter.branch, Branch::Intersection);
        assert_eq!(inter.graph, g(&[(Q, n(1))]));
        // gamma at BSC stays on the backward branch
        assert_eq!(fuse(&f, &b, 1.0 / 3.0, FuseMode::Union).unwrap().branch, Branch::Backward);
    }

    #[test]
    fn union_cycles_are_repaired() {
        let f = g(&[(Q, n(1)), (n(1), n(2)), (n(2), n(3))]);
        let b = g(&[(Q, n(1)), (n(1), n(3)), (n(3), n(2))]);
        let out = fuse(&f, &b, 0.1, FuseMode::Union).unwrap();
        assert!(out.cycle_repaired);
        assert!(validate_structure(&out.graph).is_empty(), "{:?}", out.graph);
        assert!(out.graph.edges().is_superset(b.edges()));
    }

    #[test]
    fn extra_parent_flags_ambiguity() {
        let f = g(&[(Q, n(1)), (n(1), n(2)), (Q, n(3)), (n(3), n(2))]);
        let b = g(&[(Q, n(1)), (n(1), n(2))]);
        let out = fuse(&f, &b, 0.2, FuseMode::Union).unwrap();
        assert!(out.dedup_ambiguous);
        assert_eq!(out.graph, f);
    }

    #[test]
    fn gamma_range_is_checked() {
        let a = g(&[(Q, n(1))]);
        assert_eq!(fuse(&a, &a, 1.5, FuseMode::Union), Err(FuseError::GammaOutOfRange(1.5)));
        assert!(gamma_sweep(&[], &[0.2, -0.1], FuseMode::Union).is_err());
        assert_eq!(gamma_sweep(&[], &[], FuseMode::Union), Err(FuseError::EmptyGrid));
        assert_eq!("intersection".parse::<FuseMode>().unwrap(), FuseMode::Intersection);
        assert!("sum".parse::<FuseMode>().is_err());
    }

    #[test]
    fn sweep_endpoints() {
        let gold = g(&[(Q, n(1)), (n(1), n(2))]);
        let inputs = vec![
            SweepInput { forward: gold.clone(), backward: gold.clone(), gold: gold.clone() },
            // BSC 1/2: the union recovers the gold graph only for gamma < 1/2
            SweepInput { forward: gold.clone(), backward: g(&[(Q, n(1))]), gold: gold.clone() },
        ];
        let rows = gamma_sweep(&inputs, &[0.0, 0.2, 0.5, 1.0], FuseMode::Union).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].gm, 100.0);
        assert_eq!(rows[1].gm, 100.0);
        assert_eq!(rows[2].gm, 50.0);
        assert_eq!(rows[3].gm, 50.0);
        // backward-only: F1 of {1} vs {1,2} is 2/3
        assert!((rows[3].f1 - 100.0 * (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-9);
    }

    fn graph() -> impl Strategy<Value = EvidenceGraph> {
        proptest::collection::vec((0u32..6, 1u32..7), 0..8).prop_map(|pairs| {
            // orient every edge from the smaller id; hang sources off Q
            let mut out = EvidenceGraph::new();
            for (a, b) in pairs {
                let (lo, hi) = (a.min(b), a.max(b));
                if lo == hi {
                    continue;
                }
                let from = if lo == 0 { Q } else { n(lo) };
                out.add_edge(from, n(hi));
            }
            let orphans: Vec<NodeId> =
                out.nodes().iter().copied().filter(|&x| !x.is_root() && out.parents(x).next().is_none()).collect();
            for o in orphans {
                out.add_edge(Q, o);
            }
            out
        })
    }

    proptest! {
        #[test]
        fn fuse_properties(f in graph(), b in graph(), g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0) {
            let out = fuse(&f, &b, g1, FuseMode::Union).unwrap();
            prop_assert!(validate_structure(&out.graph).is_empty());
            prop_assert!(out.graph.nodes().is_superset(b.nodes()));
            if out.bsc > g1 && !out.cycle_repaired {
                prop_assert!(out.graph.nodes().is_superset(f.nodes()));
            }
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            if out.bsc > hi {
                prop_assert_eq!(fuse(&f, &b, lo, FuseMode::Union).unwrap().branch, Branch::Union);
                prop_assert_eq!(fuse(&f, &b, hi, FuseMode::Union).unwrap().branch, Branch::Union);
            }
            let inter = fuse(&f, &b, g1, FuseMode::Intersection).unwrap();
            prop_assert!(validate_structure(&inter.graph).is_empty());
        }

        #[test]
        fn fuse_is_idempotent(a in graph(), gamma in 0.0f64..1.0) {
            if !a.edges().is_empty() {
                prop_assert_eq!(fuse(&a, &a, gamma, FuseMode::Union).unwrap().graph, a);
            }
        }
    }
}
