use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{FactId, NodeId, StructureClass, TextualDatabase};

pub type Edge = (NodeId, NodeId);

/// Directed graph over fact ids with the question root `Q`.
///
/// Set semantics on both nodes and edges. Construction does not enforce the
/// evidence-graph constraints; use [`validate_graph`] or
/// [`validate_structure`] for that.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EvidenceGraph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
}

impl Default for EvidenceGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl EvidenceGraph {
    /// The graph holding only `Q`.
    pub fn new() -> Self {
        Self { nodes: BTreeSet::from([NodeId::Root]), edges: BTreeSet::new() }
    }

    /// Builds a graph from edges; endpoints and `Q` are added as nodes.
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut g = Self::new();
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Raw constructor that keeps exactly the given sets, even if an edge
    /// endpoint is missing or `Q` is absent.
    pub fn from_parts(nodes: BTreeSet<NodeId>, edges: BTreeSet<Edge>) -> Self {
        Self { nodes, edges }
    }

    pub fn add_node(&mut self, n: NodeId) -> bool {
        self.nodes.insert(n)
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId) -> bool {
        self.nodes.insert(from);
        self.nodes.insert(to);
        self.edges.insert((from, to))
    }

    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) -> bool {
        self.edges.remove(&(from, to))
    }

    /// Removes a node together with its incident edges. `Q` is kept.
    pub fn remove_node(&mut self, n: NodeId) -> bool {
        if n.is_root() {
            return false;
        }
        self.edges.retain(|&(a, b)| a != n && b != n);
        self.nodes.remove(&n)
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }

    pub fn contains_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Evidence node ids in ascending order.
    pub fn fact_ids(&self) -> impl Iterator<Item = FactId> + '_ {
        self.nodes.iter().filter_map(|n| n.as_fact())
    }

    pub fn evidence_count(&self) -> usize {
        self.nodes.len() - usize::from(self.nodes.contains(&NodeId::Root))
    }

    /// Children of `n` in ascending id order.
    pub fn children(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.range((n, NodeId::Root)..=(n, NodeId::Fact(FactId(u32::MAX)))).map(|&(_, b)| b)
    }

    pub fn parents(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.iter().filter(move |&&(_, b)| b == n).map(|&(a, _)| a)
    }

    pub fn out_degree(&self, n: NodeId) -> usize {
        self.children(n).count()
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.children(n).next().is_none()
    }

    /// Whether `to` is reachable from `from` (reflexive).
    pub fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for c in self.children(n) {
                if c == to {
                    return true;
                }
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Nodes reachable from `Q`, `Q` included when present.
    pub fn reachable_from_root(&self) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        if !self.nodes.contains(&NodeId::Root) {
            return seen;
        }
        seen.insert(NodeId::Root);
        let mut stack = vec![NodeId::Root];
        while let Some(n) = stack.pop() {
            for c in self.children(n) {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// Drops every node (and incident edge) not reachable from `Q`.
    pub fn prune_unreachable(&mut self) -> usize {
        let keep = self.reachable_from_root();
        let before = self.nodes.len();
        self.nodes.retain(|n| keep.contains(n));
        self.edges.retain(|(a, b)| keep.contains(a) && keep.contains(b));
        before - self.nodes.len()
    }

    /// One node set of a directed cycle, if any exists.
    pub fn find_cycle(&self) -> Option<Vec<NodeId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: BTreeMap<NodeId, Mark> = BTreeMap::new();
        let adjacency: BTreeSet<NodeId> =
            self.nodes.iter().copied().chain(self.edges.iter().flat_map(|&(a, b)| [a, b])).collect();
        for &start in &adjacency {
            if marks.contains_key(&start) {
                continue;
            }
            // iterative DFS keeping the open path for cycle reporting
            let mut path: Vec<NodeId> = vec![start];
            let mut iters: Vec<Vec<NodeId>> = vec![self.children(start).collect()];
            marks.insert(start, Mark::Open);
            while let Some(top) = iters.last_mut() {
                let Some(next) = top.pop() else {
                    iters.pop();
                    if let Some(done) = path.pop() {
                        marks.insert(done, Mark::Done);
                    }
                    continue;
                };
                match marks.get(&next) {
                    Some(Mark::Open) => {
                        let from = path.iter().position(|&n| n == next).unwrap_or(0);
                        return Some(path[from..].to_vec());
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        path.push(next);
                        iters.push(self.children(next).collect());
                    }
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Every root-to-leaf path, depth-first with children in ascending id
    /// order, so the paths come out in lexicographic order. Each path starts
    /// with `Q`. Requires an acyclic graph.
    pub fn root_to_leaf_paths(&self) -> Vec<Vec<NodeId>> {
        let mut out = Vec::new();
        if !self.nodes.contains(&NodeId::Root) || self.is_leaf(NodeId::Root) {
            return out;
        }
        let mut path = vec![NodeId::Root];
        self.collect_paths(&mut path, &mut out);
        out
    }

    fn collect_paths(&self, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let last = *path.last().expect("path starts at Q");
        let mut any = false;
        for c in self.children(last) {
            any = true;
            path.push(c);
            self.collect_paths(path, out);
            path.pop();
        }
        if !any {
            out.push(path.clone());
        }
    }

    /// Evidence nodes on the longest path from `Q` down to `n`, `n`
    /// included; 0 for `Q`.
    pub fn depth_of(&self, n: NodeId) -> usize {
        fn longest(g: &EvidenceGraph, n: NodeId, memo: &mut BTreeMap<NodeId, usize>) -> usize {
            if n.is_root() {
                return 0;
            }
            if let Some(&d) = memo.get(&n) {
                return d;
            }
            let d = 1 + g.parents(n).map(|p| longest(g, p, memo)).max().unwrap_or(0);
            memo.insert(n, d);
            d
        }
        longest(self, n, &mut BTreeMap::new())
    }

    /// Edges on the longest path from `n` down to a leaf.
    pub fn height(&self, n: NodeId) -> usize {
        fn longest(g: &EvidenceGraph, n: NodeId, memo: &mut BTreeMap<NodeId, usize>) -> usize {
            if let Some(&d) = memo.get(&n) {
                return d;
            }
            let d = g.children(n).map(|c| 1 + longest(g, c, memo)).max().unwrap_or(0);
            memo.insert(n, d);
            d
        }
        longest(self, n, &mut BTreeMap::new())
    }

    /// Number of evidence nodes on the longest path from `Q`.
    pub fn depth(&self) -> usize {
        self.height(NodeId::Root)
    }
}

impl fmt::Debug for EvidenceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EvidenceGraph {{ nodes: [")?;
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("], edges: [")?;
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("] }")
    }
}

/// A broken evidence-graph constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintViolation {
    /// A node does not name a fact of the database.
    UnknownFact(FactId),
    /// A node's fact carries no knowledge triple.
    NoProvenance(FactId),
    /// The graph does not contain the question root.
    MissingRoot,
    /// An edge endpoint is not in the node set.
    DanglingEdge(Edge),
    /// An edge points into `Q`.
    EdgeIntoRoot(NodeId),
    Cycle(Vec<NodeId>),
    /// A node has no path from `Q`.
    Unreachable(NodeId),
    /// A node occurs twice on one root-to-leaf path.
    RepeatedOnPath(NodeId),
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownFact(id) => write!(f, "node {id} is not a fact of the database"),
            Self::NoProvenance(id) => write!(f, "fact {id} has no knowledge triple"),
            Self::MissingRoot => f.write_str("graph has no question root"),
            Self::DanglingEdge((a, b)) => write!(f, "edge {a}->{b} has an endpoint outside the node set"),
            Self::EdgeIntoRoot(a) => write!(f, "edge {a}->Q points into the root"),
            Self::Cycle(nodes) => {
                let names: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
                write!(f, "cycle through {}", names.join("->"))
            }
            Self::Unreachable(n) => write!(f, "node {n} is not reachable from Q"),
            Self::RepeatedOnPath(n) => write!(f, "node {n} repeats on a root path"),
        }
    }
}

/// Checks the shape constraints that do not need the database: rooted,
/// closed edge set, acyclic, every node reachable from `Q`, no repeats on a
/// root-to-leaf path.
pub fn validate_structure(g: &EvidenceGraph) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let has_root = g.contains_node(NodeId::Root);
    if !has_root {
        out.push(ConstraintViolation::MissingRoot);
    }
    for &(a, b) in g.edges() {
        if !g.contains_node(a) || !g.contains_node(b) {
            out.push(ConstraintViolation::DanglingEdge((a, b)));
        }
        if b.is_root() {
            out.push(ConstraintViolation::EdgeIntoRoot(a));
        }
    }
    let cycle = g.find_cycle();
    let acyclic = cycle.is_none();
    if let Some(nodes) = cycle {
        out.push(ConstraintViolation::Cycle(nodes));
    }
    if has_root {
        let reach = g.reachable_from_root();
        out.extend(g.nodes().iter().filter(|n| !reach.contains(n)).map(|&n| ConstraintViolation::Unreachable(n)));
        // a cycle reachable from Q is already reported; only walk paths on DAGs
        if acyclic {
            out.extend(repeated_on_paths(g).into_iter().map(ConstraintViolation::RepeatedOnPath));
        }
    }
    out
}

fn repeated_on_paths(g: &EvidenceGraph) -> BTreeSet<NodeId> {
    let mut repeated = BTreeSet::new();
    for path in g.root_to_leaf_paths() {
        let mut seen = BTreeSet::new();
        for n in path {
            if !seen.insert(n) {
                repeated.insert(n);
            }
        }
    }
    repeated
}

/// Checks all evidence-graph constraints against a database. An empty
/// result means the graph is valid. The graph holding only `Q` is valid.
pub fn validate_graph(g: &EvidenceGraph, db: &TextualDatabase) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    for id in g.fact_ids() {
        match db.get(id) {
            None => out.push(ConstraintViolation::UnknownFact(id)),
            Some(f) if f.provenance.is_empty() => out.push(ConstraintViolation::NoProvenance(id)),
            Some(_) => {}
        }
    }
    out.extend(validate_structure(g));
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid evidence graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ConstraintViolation>),
    #[error("graph has no evidence nodes")]
    NoEvidence,
}

/// Classifies a valid graph: single chain iff `Q` has out-degree 1, single
/// hop iff the longest path from `Q` holds one evidence node.
pub fn structure_class_of(g: &EvidenceGraph) -> Result<StructureClass, GraphError> {
    let violations = validate_structure(g);
    if !violations.is_empty() {
        return Err(GraphError::Invalid(violations));
    }
    if g.evidence_count() == 0 {
        return Err(GraphError::NoEvidence);
    }
    Ok(StructureClass::new(g.out_degree(NodeId::Root) > 1, g.depth() > 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Fact, Triple};

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }

    fn db(ids: &[u32]) -> TextualDatabase {
        let facts = ids
            .iter()
            .map(|&i| Fact {
                id: FactId(i),
                text: format!("fact {i}"),
                is_distractor: false,
                distractor_kind: None,
                provenance: vec![Triple::new(format!("e{i}"), "r", "v").unwrap()],
            })
            .collect();
        TextualDatabase::new(facts).unwrap()
    }

    #[test]
    fn minimal_chain_is_valid() {
        let g = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2))]);
        assert!(validate_graph(&g, &db(&[1, 2])).is_empty());
    }

    #[test]
    fn two_cycle_is_reported_once() {
        let g = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2)), (n(2), n(1))]);
        let v = validate_graph(&g, &db(&[1, 2]));
        assert_eq!(v.len(), 1, "{v:?}");
        match &v[0] {
            ConstraintViolation::Cycle(nodes) => {
                let set: BTreeSet<_> = nodes.iter().copied().collect();
                assert_eq!(set, BTreeSet::from([n(1), n(2)]));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn detached_chain_is_unreachable() {
        // BFS from Q by hand: {Q} only; a and b are never visited.
        let g = EvidenceGraph::from_edges([(n(1), n(2))]);
        let v = validate_graph(&g, &db(&[1, 2]));
        assert_eq!(v, vec![ConstraintViolation::Unreachable(n(1)), ConstraintViolation::Unreachable(n(2))]);
    }

    #[test]
    fn unknown_and_raw_defects() {
        let g = EvidenceGraph::from_edges([(Q, n(7))]);
        assert_eq!(validate_graph(&g, &db(&[1])), vec![ConstraintViolation::UnknownFact(FactId(7))]);

        let raw = EvidenceGraph::from_parts(BTreeSet::from([n(1)]), BTreeSet::from([(n(1), n(2))]));
        let v = validate_structure(&raw);
        assert!(v.contains(&ConstraintViolation::MissingRoot));
        assert!(v.contains(&ConstraintViolation::DanglingEdge((n(1), n(2)))));

        let into_root = EvidenceGraph::from_edges([(Q, n(1)), (n(1), Q)]);
        assert!(validate_structure(&into_root).contains(&ConstraintViolation::EdgeIntoRoot(n(1))));
    }

    #[test]
    fn root_only_graph_is_valid_but_unclassified() {
        let g = EvidenceGraph::new();
        assert!(validate_graph(&g, &db(&[1])).is_empty());
        assert_eq!(structure_class_of(&g), Err(GraphError::NoEvidence));
    }

    #[test]
    fn structure_classes() {
        let sc_sh = EvidenceGraph::from_edges([(Q, n(1))]);
        let sc_mh = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2))]);
        let mc_sh = EvidenceGraph::from_edges([(Q, n(1)), (Q, n(2))]);
        let mc_mh = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2)), (Q, n(3)), (n(3), n(4))]);
        assert_eq!(structure_class_of(&sc_sh).unwrap(), StructureClass::ScSh);
        assert_eq!(structure_class_of(&sc_mh).unwrap(), StructureClass::ScMh);
        assert_eq!(structure_class_of(&mc_sh).unwrap(), StructureClass::McSh);
        assert_eq!(structure_class_of(&mc_mh).unwrap(), StructureClass::McMh);

        let cyclic = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2)), (n(2), n(1))]);
        assert!(matches!(structure_class_of(&cyclic), Err(GraphError::Invalid(_))));
    }

    #[test]
    fn shared_node_paths_are_lexicographic() {
        let g = EvidenceGraph::from_edges([(Q, n(18)), (n(18), n(20)), (n(18), n(10))]);
        assert_eq!(g.root_to_leaf_paths(), vec![vec![Q, n(18), n(10)], vec![Q, n(18), n(20)]]);
        assert_eq!(g.depth(), 2);
        assert_eq!(g.out_degree(Q), 1);
    }

    #[test]
    fn prune_drops_detached_nodes() {
        let mut g = EvidenceGraph::from_edges([(Q, n(1)), (n(2), n(3))]);
        assert_eq!(g.prune_unreachable(), 2);
        assert_eq!(g, EvidenceGraph::from_edges([(Q, n(1))]));
    }
}
