//! The `Q-18-20;Q-18-10;` chain notation: each root-to-leaf path of an
//! evidence graph written as dash-joined ids, terminated by `;`.

use std::fmt::Write as _;

use thiserror::Error;

use super::{EvidenceGraph, FactId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainParseErrorKind {
    Empty,
    MissingRoot,
    BadToken(String),
    Cycle,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("chain {chain:?}: {}", match kind {
    ChainParseErrorKind::Empty => "empty chain".to_string(),
    ChainParseErrorKind::MissingRoot => "does not start at Q".to_string(),
    ChainParseErrorKind::BadToken(t) => format!("bad token {t:?}"),
    ChainParseErrorKind::Cycle => "closes a cycle".to_string(),
})]
pub struct ChainParseError {
    pub chain: String,
    pub kind: ChainParseErrorKind,
}

/// Writes every root-to-leaf path in lexicographic id order. The graph
/// holding only `Q` serializes to the empty string.
pub fn serialize_chains(g: &EvidenceGraph) -> String {
    let mut out = String::new();
    for path in g.root_to_leaf_paths() {
        for (i, n) in path.iter().enumerate() {
            if i > 0 {
                out.push('-');
            }
            let _ = write!(out, "{n}");
        }
        out.push(';');
    }
    out
}

/// Parses chain notation back into a graph. Whitespace around chains is
/// ignored and the final `;` is optional.
pub fn parse_chains(s: &str) -> Result<EvidenceGraph, ChainParseError> {
    let mut g = EvidenceGraph::new();
    let segments: Vec<&str> = s.trim().split(';').collect();
    let last = segments.len() - 1;
    for (i, raw) in segments.into_iter().enumerate() {
        let chain = raw.trim();
        let err = |kind| ChainParseError { chain: chain.to_string(), kind };
        if chain.is_empty() {
            if i == last {
                break;
            }
            return Err(err(ChainParseErrorKind::Empty));
        }
        let mut tokens = chain.split('-').map(str::trim);
        if tokens.next() != Some("Q") {
            return Err(err(ChainParseErrorKind::MissingRoot));
        }
        let mut prev = NodeId::Root;
        let mut len = 0;
        for tok in tokens {
            let id = parse_id(tok).ok_or_else(|| err(ChainParseErrorKind::BadToken(tok.into())))?;
            let node = NodeId::Fact(id);
            // the new edge prev->node closes a cycle iff node already reaches prev
            if g.contains_node(node) && g.reaches(node, prev) {
                return Err(err(ChainParseErrorKind::Cycle));
            }
            g.add_edge(prev, node);
            prev = node;
            len += 1;
        }
        if len == 0 {
            return Err(err(ChainParseErrorKind::Empty));
        }
    }
    Ok(g)
}

fn parse_id(tok: &str) -> Option<FactId> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    tok.parse().ok().map(FactId)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: NodeId = NodeId::Root;
    fn n(i: u32) -> NodeId {
        NodeId::fact(i)
    }

    #[test]
    fn exemplar_strings() {
        assert_eq!(parse_chains("Q-16;").unwrap(), EvidenceGraph::from_edges([(Q, n(16))]));
        assert_eq!(parse_chains("Q-13;Q-15;").unwrap(), EvidenceGraph::from_edges([(Q, n(13)), (Q, n(15))]));
        assert_eq!(
            parse_chains("Q-18-20;Q-18-10;").unwrap(),
            EvidenceGraph::from_edges([(Q, n(18)), (n(18), n(20)), (n(18), n(10))])
        );
    }

    #[test]
    fn canonical_serialization() {
        assert_eq!(serialize_chains(&EvidenceGraph::from_edges([(Q, n(16))])), "Q-16;");
        assert_eq!(serialize_chains(&EvidenceGraph::from_edges([(Q, n(13)), (Q, n(15))])), "Q-13;Q-15;");
        let g = EvidenceGraph::from_edges([(Q, n(18)), (n(18), n(20)), (n(18), n(10))]);
        assert_eq!(serialize_chains(&g), "Q-18-10;Q-18-20;");
        assert_eq!(serialize_chains(&EvidenceGraph::new()), "");
        assert_eq!(parse_chains("").unwrap(), EvidenceGraph::new());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_chains("Q-1-2;Q-1-3;Q-1-2").unwrap();
        assert_eq!(g.edges().len(), 3);
    }

    #[test]
    fn errors_name_the_chain() {
        let e = parse_chains("Q-1-2;Q-2-1;").unwrap_err();
        assert_eq!(e, ChainParseError { chain: "Q-2-1".into(), kind: ChainParseErrorKind::Cycle });

        let e = parse_chains("Q-1;1-2;").unwrap_err();
        assert_eq!(e.kind, ChainParseErrorKind::MissingRoot);
        assert_eq!(e.chain, "1-2");

        assert_eq!(parse_chains("Q-x;").unwrap_err().kind, ChainParseErrorKind::BadToken("x".into()));
        assert_eq!(parse_chains("Q-1-Q;").unwrap_err().kind, ChainParseErrorKind::BadToken("Q".into()));
        assert_eq!(parse_chains("Q;").unwrap_err().kind, ChainParseErrorKind::Empty);
        assert_eq!(parse_chains("Q-1;;Q-2;").unwrap_err().kind, ChainParseErrorKind::Empty);
        assert_eq!(parse_chains("Q-3-3;").unwrap_err().kind, ChainParseErrorKind::Cycle);
        assert_eq!(parse_chains("Q--3;").unwrap_err().kind, ChainParseErrorKind::BadToken("".into()));
    }

    #[test]
    fn tolerates_whitespace() {
        assert_eq!(parse_chains(" Q-6; Q-22-13 ;\n").unwrap().edges().len(), 3);
    }
}
