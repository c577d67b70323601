//! Brute-force reference implementations used to cross-check the metrics.
//! They share no code with [`crate::metrics`] and are exponential, so they
//! are only meant for graphs of a handful of nodes.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::model::{Edge, EvidenceGraph, NodeId};

/// Graph over a label pool of at most 8 labels, index 0 being `Q`:
/// node bitmask plus edge bitmask over ordered label pairs.
type State = (u8, u64);

fn encode(g: &EvidenceGraph, pool: &[NodeId]) -> State {
    let pos = |n: &NodeId| pool.iter().position(|p| p == n).expect("node outside label pool");
    let nodes = g.nodes().iter().fold(0u8, |m, n| m | 1 << pos(n));
    let edges = g.edges().iter().fold(0u64, |m, (a, b)| m | 1 << (pos(a) * 8 + pos(b)));
    (nodes, edges)
}

fn neighbours((nodes, edges): State, labels: usize, out: &mut Vec<State>) {
    out.clear();
    for i in 1..labels {
        let bit = 1u8 << i;
        if nodes & bit == 0 {
            out.push((nodes | bit, edges));
        } else {
            let incident = (0..labels).any(|j| edges & (1 << (i * 8 + j)) != 0 || edges & (1 << (j * 8 + i)) != 0);
            if !incident {
                out.push((nodes & !bit, edges));
            }
        }
    }
    for i in 0..labels {
        for j in 0..labels {
            if i == j || nodes & (1 << i) == 0 || nodes & (1 << j) == 0 {
                continue;
            }
            out.push((nodes, edges ^ (1 << (i * 8 + j))));
        }
    }
}

/// Length of the shortest sequence of unit edits (insert node, delete an
/// isolated non-root node, insert edge, delete edge) from `a` to `b`, found
/// by bidirectional breadth-first search over all graphs on the label pool
/// `{Q} ∪ nodes(a) ∪ nodes(b)`. Returns `None` past `max_depth`.
pub fn bfs_edit_distance(a: &EvidenceGraph, b: &EvidenceGraph, max_depth: u32) -> Option<u32> {
    let pool: Vec<NodeId> =
        std::iter::once(NodeId::Root).chain(a.nodes().union(b.nodes()).copied().filter(|n| !n.is_root())).collect();
    assert!(pool.len() <= 8, "label pool too large for the brute-force oracle");
    let labels = pool.len();
    let (start, goal) = (encode(a, &pool), encode(b, &pool));
    if start == goal {
        return Some(0);
    }
    let mut seen = [HashMap::from([(start, 0u32)]), HashMap::from([(goal, 0u32)])];
    let mut frontier = [vec![start], vec![goal]];
    let mut depth = [0u32, 0u32];
    let mut buf = Vec::new();
    while depth[0] + depth[1] < max_depth {
        let side = usize::from(frontier[1].len() < frontier[0].len());
        if frontier[side].is_empty() {
            return None;
        }
        depth[side] += 1;
        let mut next = Vec::new();
        let mut best: Option<u32> = None;
        for &s in &frontier[side] {
            neighbours(s, labels, &mut buf);
            for &t in &buf {
                if let Some(&d) = seen[1 - side].get(&t) {
                    let total = depth[side] + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                if let std::collections::hash_map::Entry::Vacant(e) = seen[side].entry(t) {
                    e.insert(depth[side]);
                    next.push(t);
                }
            }
        }
        if best.is_some() {
            return best;
        }
        frontier[side] = next;
    }
    None
}

/// Tries every bijection between the evidence nodes (with `Q` fixed) and
/// reports whether one carries the edge set of `a` exactly onto `b`.
pub fn exhaustive_isomorphic(a: &EvidenceGraph, b: &EvidenceGraph) -> bool {
    let an: Vec<NodeId> = a.nodes().iter().copied().filter(|n| !n.is_root()).collect();
    let bn: Vec<NodeId> = b.nodes().iter().copied().filter(|n| !n.is_root()).collect();
    if an.len() != bn.len() || a.edges().len() != b.edges().len() {
        return false;
    }
    let mut perm: Vec<usize> = (0..bn.len()).collect();
    let target: &BTreeSet<Edge> = b.edges();
    loop {
        let map = |n: NodeId| -> NodeId {
            if n.is_root() {
                n
            } else {
                bn[perm[an.iter().position(|&x| x == n).expect("node of a")]]
            }
        };
        let image: BTreeSet<Edge> = a.edges().iter().map(|&(x, y)| (map(x), map(y))).collect();
        if &image == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Random valid evidence graph with `1..=max_evidence` nodes drawn from
/// `labels`: every new node hangs off `Q` or an earlier node, and extra
/// edges only point forward in insertion order, so the result is rooted
/// and acyclic.
pub fn random_graph(rng: &mut impl Rng, labels: &[u32], max_evidence: usize, extra_edge_p: f64) -> EvidenceGraph {
    let count = rng.gen_range(1..=max_evidence.min(labels.len()));
    let mut pool = labels.to_vec();
    let mut order = vec![NodeId::Root];
    for _ in 0..count {
        let id = pool.swap_remove(rng.gen_range(0..pool.len()));
        order.push(NodeId::fact(id));
    }
    let mut g = EvidenceGraph::new();
    for i in 1..order.len() {
        let parent = order[rng.gen_range(0..i)];
        g.add_edge(parent, order[i]);
        for j in 0..i {
            if rng.gen_bool(extra_edge_p) {
                g.add_edge(order[j], order[i]);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }

    #[test]
    fn bfs_oracle_on_small_cases() {
        let gold = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2))]);
        assert_eq!(bfs_edit_distance(&gold, &gold, 10), Some(0));
        assert_eq!(bfs_edit_distance(&EvidenceGraph::from_edges([(Q, n(1))]), &gold, 10), Some(2));
        let other = EvidenceGraph::from_edges([(Q, n(1)), (Q, n(2))]);
        assert_eq!(bfs_edit_distance(&gold, &other, 10), Some(2));
        // delete 1->2, delete Q->1, delete 1, delete 2, insert 3, insert Q->3
        let far = EvidenceGraph::from_edges([(Q, n(3))]);
        assert_eq!(bfs_edit_distance(&gold, &far, 10), Some(6));
    }

    #[test]
    fn exhaustive_isomorphism() {
        let a = EvidenceGraph::from_edges([(Q, n(1)), (n(1), n(2))]);
        let b = EvidenceGraph::from_edges([(Q, n(2)), (n(2), n(3))]);
        let c = EvidenceGraph::from_edges([(Q, n(1)), (Q, n(2))]);
        assert!(exhaustive_isomorphic(&a, &b));
        assert!(!exhaustive_isomorphic(&a, &c));
        assert!(exhaustive_isomorphic(&c, &c));
    }

    #[test]
    fn random_graphs_are_valid() {
        let mut rng = crate::seed::rng(3, &[]);
        for _ in 0..200 {
            let g = random_graph(&mut rng, &[1, 2, 3, 4, 5], 5, 0.3);
            assert!(crate::model::validate_structure(&g).is_empty(), "{g:?}");
        }
    }

    mod props {
        use proptest::prelude::*;
        use rand::SeedableRng;

        use super::super::*;
        use crate::metrics::{bsc, graph_edit_distance, graph_match, graph_structure, set_metrics};
        use crate::model::FactId;

        fn graph() -> impl Strategy<Value = EvidenceGraph> {
            (any::<u64>(), 1usize..=5, 0.0f64..0.5).prop_map(|(seed, max, p)| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                random_graph(&mut rng, &[1, 2, 3, 4, 5], max, p)
            })
        }

        fn small_graph() -> impl Strategy<Value = EvidenceGraph> {
            (any::<u64>(), 1usize..=3, 0.0f64..0.5).prop_map(|(seed, max, p)| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                random_graph(&mut rng, &[1, 2, 3], max, p)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn ged_matches_bfs_oracle(a in small_graph(), b in small_graph()) {
                prop_assert_eq!(Some(graph_edit_distance(&a, &b)), bfs_edit_distance(&a, &b, 30));
            }

            #[test]
            fn ged_is_a_metric(a in graph(), b in graph(), c in graph()) {
                prop_assert_eq!(graph_edit_distance(&a, &a), 0);
                prop_assert_eq!(graph_edit_distance(&a, &b), graph_edit_distance(&b, &a));
                prop_assert!(graph_edit_distance(&a, &c) <= graph_edit_distance(&a, &b) + graph_edit_distance(&b, &c));
            }

            #[test]
            fn structure_agrees_with_bijection_search(a in graph(), b in graph()) {
                prop_assert_eq!(graph_structure(&a, &b), exhaustive_isomorphic(&a, &b));
                prop_assert!(graph_structure(&a, &a));
            }

            #[test]
            fn match_implies_structure_and_zero_distance(a in graph(), b in graph()) {
                if graph_match(&a, &b) {
                    prop_assert!(graph_structure(&a, &b));
                    prop_assert_eq!(graph_edit_distance(&a, &b), 0);
                }
                prop_assert_eq!(graph_match(&a, &b), graph_edit_distance(&a, &b) == 0);
            }

            #[test]
            fn bsc_is_a_bounded_symmetric_similarity(a in graph(), b in graph()) {
                let v = bsc(&a, &b);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert_eq!(v, bsc(&b, &a));
                prop_assert_eq!(v == 1.0, a.edges() == b.edges());
            }

            #[test]
            fn f1_is_harmonic_mean(p in proptest::collection::btree_set(0u32..8, 0..6),
                                   g in proptest::collection::btree_set(0u32..8, 0..6)) {
                let p: BTreeSet<FactId> = p.into_iter().map(FactId).collect();
                let g: BTreeSet<FactId> = g.into_iter().map(FactId).collect();
                let m = set_metrics(&p, &g);
                if m.precision + m.recall > 0.0 {
                    let h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                    prop_assert!((m.f1 - h).abs() < 1e-12);
                } else {
                    prop_assert_eq!(m.f1, 0.0);
                }
                prop_assert_eq!(m.em, p == g);
            }
        }
    }
}
