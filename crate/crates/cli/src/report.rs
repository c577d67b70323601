use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use graphhop_core::metrics::InstanceMetrics;
use graphhop_core::model::{QuestionType, StructureClass};
use graphhop_core::reconstruct::Branch;
use graphhop_core::retrieval::RetrievalConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionRecord {
    pub branch: Branch,
    pub bsc: f64,
    pub cycle_repaired: bool,
    pub dedup_ambiguous: bool,
}

/// Per-instance scores. Graph metrics are absent for set-only methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub structure_class: StructureClass,
    pub question_type: QuestionType,
    pub predicted: String,
    pub answer: String,
    pub gm: Option<bool>,
    pub gs: Option<bool>,
    pub ged: Option<u32>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub em: bool,
    pub qa_em: bool,
    pub truncated: bool,
    pub fusion: Option<FusionRecord>,
}

impl InstanceRecord {
    pub fn metrics(&mut self, m: &InstanceMetrics) {
        self.gm = m.graph.map(|g| g.gm);
        self.gs = m.graph.map(|g| g.gs);
        self.ged = m.graph.map(|g| g.ged);
        self.precision = m.set.precision;
        self.recall = m.set.recall;
        self.f1 = m.set.f1;
        self.em = m.set.em;
        self.qa_em = m.qa_em;
    }
}

/// Means over instances: rates in percent, GED in edit operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub gm: Option<f64>,
    pub gs: Option<f64>,
    pub ged: Option<f64>,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub em: f64,
    pub qa_em: f64,
}

fn pct(flag: bool) -> f64 {
    if flag {
        100.0
    } else {
        0.0
    }
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

fn mean_all<T>(
    records: &[&InstanceRecord],
    f: impl Fn(&InstanceRecord) -> Option<T>,
    g: impl Fn(T) -> f64,
) -> Option<f64> {
    let values: Option<Vec<f64>> = records.iter().map(|r| f(r).map(&g)).collect();
    values.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter(), records.len()))
}

impl Aggregate {
    pub fn of<'a>(records: impl IntoIterator<Item = &'a InstanceRecord>) -> Self {
        let records: Vec<&InstanceRecord> = records.into_iter().collect();
        let n = records.len();
        Self {
            n,
            gm: mean_all(&records, |r| r.gm, pct),
            gs: mean_all(&records, |r| r.gs, pct),
            ged: mean_all(&records, |r| r.ged, f64::from),
            f1: mean(records.iter().map(|r| 100.0 * r.f1), n),
            precision: mean(records.iter().map(|r| 100.0 * r.precision), n),
            recall: mean(records.iter().map(|r| 100.0 * r.recall), n),
            em: mean(records.iter().map(|r| pct(r.em)), n),
            qa_em: mean(records.iter().map(|r| pct(r.qa_em)), n),
        }
    }

    fn cells(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        format!(
            "{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
            opt(self.gm),
            opt(self.gs),
            opt(self.ged),
            self.f1,
            self.precision,
            self.recall,
            self.em,
            self.qa_em
        )
    }
}

pub const TABLE_HEADER: &str = "GM\tGS\tGED\tF1\tPrecision\tRecall\tEM\tQA-EM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub scorer: Option<String>,
    pub gamma: Option<f64>,
    pub fuse_mode: Option<String>,
    pub seed: u64,
    pub retrieval: RetrievalConfig,
    pub aggregate: Aggregate,
    pub truncated: usize,
    pub instances: Vec<InstanceRecord>,
}

impl RunReport {
    pub fn table(&self) -> String {
        format!("method\t{TABLE_HEADER}\n{}\t{}\n", self.method, self.aggregate.cells())
    }

    /// `id<TAB>chains<TAB>answer` per instance.
    pub fn predictions(&self) -> String {
        predictions(self.instances.iter())
    }
}

pub fn predictions<'a>(records: impl Iterator<Item = &'a InstanceRecord>) -> String {
    records.fold(String::new(), |mut out, r| {
        let _ = writeln!(out, "{}\t{}\t{}", r.id, r.predicted, r.answer);
        out
    })
}

/// Rows of `group<TAB>n<TAB>metrics...`.
pub fn group_table(title: &str, rows: &[(String, Aggregate)]) -> String {
    let mut out = format!("{title}\tn\t{TABLE_HEADER}\n");
    for (name, agg) in rows {
        let _ = writeln!(out, "{name}\t{}\t{}", agg.n, agg.cells());
    }
    out
}
