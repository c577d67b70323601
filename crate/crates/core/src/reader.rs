//! Symbolic reader: answers a question by running its program over the
//! provenance triples of the retrieved evidence only.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use crate::model::{EvidenceGraph, FactId, QaInstance, TripleSet};

pub const UNKNOWN: &str = "unknown";

/// Facts of `graph` in chain-major order: root-to-leaf paths in chain
/// notation order, each fact emitted at its first occurrence.
pub fn evidence_order(graph: &EvidenceGraph) -> Vec<FactId> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for path in graph.root_to_leaf_paths() {
        for id in path.into_iter().filter_map(|n| n.as_fact()) {
            if seen.insert(id) {
                out.push(id);
            }
        }
    }
    out
}

pub fn read(instance: &QaInstance, retrieved: &EvidenceGraph) -> String {
    let triples = evidence_order(retrieved)
        .into_iter()
        .filter_map(|id| instance.database.get(id))
        .flat_map(|f| f.provenance.iter().cloned());
    let source = TripleSet::new(triples);
    if source.is_empty() {
        return UNKNOWN.to_string();
    }
    match instance.program.execute(&source) {
        Ok(exec) => exec.answer,
        Err(err) => {
            tracing::debug!(instance = %instance.id, %err, "reader found no answer");
            UNKNOWN.to_string()
        }
    }
}

/// Numbered evidence lines in reading order followed by the question.
pub fn format_prompt(instance: &QaInstance, retrieved: &EvidenceGraph) -> String {
    let mut out = String::new();
    for (i, id) in evidence_order(retrieved).into_iter().enumerate() {
        if let Some(f) = instance.database.get(id) {
            out.push_str(&format!("{i}. {}\n", f.text));
        }
    }
    out.push_str(&format!("Question: {}\n", instance.question));
    out
}

/// Hands the prompt to an external program on stdin and takes the first
/// line it prints as the answer.
#[derive(Debug, Clone)]
pub struct ExternalReader {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalReader {
    pub fn read(&self, instance: &QaInstance, retrieved: &EvidenceGraph) -> io::Result<String> {
        let mut child =
            Command::new(&self.program).args(&self.args).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let prompt = format_prompt(instance, retrieved);
        child.stdin.take().expect("stdin is piped").write_all(prompt.as_bytes())?;
        let mut line = String::new();
        BufReader::new(child.stdout.take().expect("stdout is piped")).read_line(&mut line)?;
        let status = child.wait()?;
        if !status.success() {
            return Err(io::Error::other(format!("reader exited with {status}")));
        }
        Ok(line.trim().to_string())
    }
}
