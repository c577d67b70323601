//! Line-delimited dataset files: one JSON record per QA instance.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    parse_chains, serialize_chains, validate_graph, ChainParseError, ConstraintViolation, Fact, GoldenProgram,
    ModelError, QaInstance, QuestionType, StructureClass, TextualDatabase,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Chains { line: usize, source: ChainParseError },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("line {line}: gold graph violates {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGold { line: usize, violations: Vec<ConstraintViolation> },
    #[error("line {line}: gold fact {id} is marked as a distractor")]
    DistractorInGold { line: usize, id: super::FactId },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    question: String,
    answer: String,
    question_type: QuestionType,
    structure_class: StructureClass,
    gold_chains: String,
    facts: Vec<Fact>,
    program: GoldenProgram,
}

/// Serializes one instance as a single JSON line (no trailing newline).
pub fn write_instance(inst: &QaInstance) -> String {
    let record = Record {
        id: inst.id.clone(),
        question: inst.question.clone(),
        answer: inst.answer.clone(),
        question_type: inst.question_type,
        structure_class: inst.structure_class,
        gold_chains: serialize_chains(&inst.gold_graph),
        facts: inst.database.facts().to_vec(),
        program: inst.program.clone(),
    };
    serde_json::to_string(&record).expect("records contain only strings, numbers and bools")
}

/// Parses one record. `line` is used for error messages only.
pub fn read_instance(text: &str, line: usize) -> Result<QaInstance, DatasetError> {
    let r: Record = serde_json::from_str(text).map_err(|source| DatasetError::Json { line, source })?;
    let gold_graph = parse_chains(&r.gold_chains).map_err(|source| DatasetError::Chains { line, source })?;
    let database = TextualDatabase::new(r.facts).map_err(|source| DatasetError::Model { line, source })?;
    let violations = validate_graph(&gold_graph, &database);
    if !violations.is_empty() {
        return Err(DatasetError::InvalidGold { line, violations });
    }
    if let Some(id) = gold_graph.fact_ids().find(|&id| database.get(id).is_some_and(|f| f.is_distractor)) {
        return Err(DatasetError::DistractorInGold { line, id });
    }
    Ok(QaInstance {
        id: r.id,
        question: r.question,
        answer: r.answer,
        gold_graph,
        program: r.program,
        question_type: r.question_type,
        structure_class: r.structure_class,
        database,
    })
}

pub fn write_dataset<'a>(
    mut out: impl Write,
    instances: impl IntoIterator<Item = &'a QaInstance>,
) -> std::io::Result<()> {
    for inst in instances {
        out.write_all(write_instance(inst).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads every non-blank line as an instance.
pub fn read_dataset(input: impl BufRead) -> Result<Vec<QaInstance>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(read_instance(&line, i + 1)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, EvidenceGraph, FactId, NodeId, Op, Triple};

    fn sample() -> QaInstance {
        let t = Triple::new("St. Louis", "area", "171.128084").unwrap();
        let facts = vec![
            Fact {
                id: FactId(13),
                text: "St. Louis area is 171.128084.".into(),
                is_distractor: false,
                distractor_kind: None,
                provenance: vec![t],
            },
            Fact {
                id: FactId(22),
                text: "The area of Lac de la Lauch is +0.11 square kilometre.".into(),
                is_distractor: true,
                distractor_kind: Some(crate::model::DistractorKind::Random),
                provenance: vec![Triple::new("Lac de la Lauch", "area", "+0.11 square kilometre").unwrap()],
            },
        ];
        QaInstance {
            id: "t-1".into(),
            question: "What is the area of St. Louis?".into(),
            answer: "171.128084".into(),
            gold_graph: EvidenceGraph::from_edges([(NodeId::Root, NodeId::fact(13))]),
            program: GoldenProgram::new(vec![
                Op::Find { entity: "St. Louis".into() },
                Op::Relate { relation: "area".into(), direction: Direction::Forward },
                Op::Query,
            ])
            .unwrap(),
            question_type: QuestionType::Query,
            structure_class: StructureClass::ScSh,
            database: TextualDatabase::new(facts).unwrap(),
        }
    }

    #[test]
    fn record_round_trip() {
        let inst = sample();
        let line = write_instance(&inst);
        assert!(line.contains(r#""gold_chains":"Q-13;""#));
        assert!(line.contains(r#""structure_class":"SC-SH""#));
        assert!(line.contains(r#""provenance":[["St. Louis","area","171.128084"]]"#));
        assert_eq!(read_instance(&line, 1).unwrap(), inst);

        let mut buf = Vec::new();
        write_dataset(&mut buf, [&inst, &inst]).unwrap();
        assert_eq!(read_dataset(&buf[..]).unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_gold() {
        let line = write_instance(&sample()).replace("Q-13;", "Q-22;");
        assert!(matches!(read_instance(&line, 3), Err(DatasetError::DistractorInGold { line: 3, .. })));
        let line = write_instance(&sample()).replace("Q-13;", "Q-99;");
        assert!(matches!(read_instance(&line, 1), Err(DatasetError::InvalidGold { .. })));
        let line = write_instance(&sample()).replace("Q-13;", "13;");
        assert!(matches!(read_instance(&line, 1), Err(DatasetError::Chains { .. })));
    }
}
