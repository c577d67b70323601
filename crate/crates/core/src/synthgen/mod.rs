//! Synthetic dataset generation: ground program templates against a triple
//! store, verbalize the evidence, add distractors, derive gold graphs and
//! split the result.

mod distractors;
mod ground;
mod store;
mod templates;
mod verbalize;

pub use distractors::{category_counts, inject_distractors, Distractors, Lexicon};
pub use ground::{build_gold_graph, ground_program, GoldError, Grounding, GroundingError};
pub use store::{StoreError, TripleStore};
pub use templates::{Draft, Pools, Template};
pub use verbalize::{verbalize, VerbalizeError};

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    structure_class_of, validate_graph, DistractorKind, Fact, FactId, QaInstance, QuestionType, StructureClass,
    TextualDatabase, Triple,
};
use crate::seed;

/// Target share of each structure class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureMix {
    pub sc_sh: f64,
    pub sc_mh: f64,
    pub mc_sh: f64,
    pub mc_mh: f64,
}

impl Default for StructureMix {
    fn default() -> Self {
        Self { sc_sh: 0.195, sc_mh: 0.386, mc_sh: 0.087, mc_mh: 0.332 }
    }
}

impl StructureMix {
    pub fn get(&self, class: StructureClass) -> f64 {
        match class {
            StructureClass::ScSh => self.sc_sh,
            StructureClass::ScMh => self.sc_mh,
            StructureClass::McSh => self.mc_sh,
            StructureClass::McMh => self.mc_mh,
        }
    }

    fn sum(&self) -> f64 {
        StructureClass::ALL.iter().map(|&c| self.get(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub n_instances: usize,
    pub structure_mix: StructureMix,
    pub db_size: usize,
    /// Share of the non-gold database slots filled with distractors.
    pub distractor_ratio: f64,
    pub rng_seed: u64,
    /// train : dev : test
    pub split_ratio: [f64; 3],
    pub bundle_probability: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n_instances: 1000,
            structure_mix: StructureMix::default(),
            db_size: 25,
            distractor_ratio: 1.0,
            rng_seed: 0,
            split_ratio: [0.8, 0.1, 0.1],
            bundle_probability: 0.3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

const EPS: f64 = 1e-6;

impl GenConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_instances == 0 {
            return Err(invalid("n_instances", "must be positive"));
        }
        let mix = self.structure_mix;
        if StructureClass::ALL.iter().any(|&c| !(0.0..=1.0).contains(&mix.get(c))) {
            return Err(invalid("structure_mix", "proportions must lie in [0, 1]"));
        }
        if (mix.sum() - 1.0).abs() > EPS {
            return Err(invalid("structure_mix", format!("proportions sum to {}, expected 1", mix.sum())));
        }
        if self.db_size < 4 {
            return Err(invalid("db_size", "must leave room for one gold fact and three distractors"));
        }
        if !(0.0..=1.0).contains(&self.distractor_ratio) {
            return Err(invalid("distractor_ratio", "must lie in [0, 1]"));
        }
        if self.split_ratio.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
            return Err(invalid("split_ratio", "ratios must lie in [0, 1]"));
        }
        if (self.split_ratio.iter().sum::<f64>() - 1.0).abs() > EPS {
            return Err(invalid("split_ratio", "ratios must sum to 1"));
        }
        if !(0.0..=1.0).contains(&self.bundle_probability) {
            return Err(invalid("bundle_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Instances per class by largest remainder.
    pub fn class_quotas(&self) -> BTreeMap<StructureClass, usize> {
        let n = self.n_instances as f64;
        let exact: Vec<(StructureClass, f64)> =
            StructureClass::ALL.iter().map(|&c| (c, n * self.structure_mix.get(c))).collect();
        let mut quotas: BTreeMap<StructureClass, usize> = exact.iter().map(|&(c, x)| (c, x.floor() as usize)).collect();
        let mut rest: Vec<(StructureClass, f64)> = exact.iter().map(|&(c, x)| (c, x - x.floor())).collect();
        rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let missing = self.n_instances - quotas.values().sum::<usize>();
        for (c, _) in rest.into_iter().take(missing) {
            *quotas.entry(c).or_default() += 1;
        }
        quotas
    }

    /// (train, dev, test) sizes: dev and test rounded down.
    pub fn split_sizes(&self) -> (usize, usize, usize) {
        let n = self.n_instances;
        let dev = (n as f64 * self.split_ratio[1] + EPS).floor() as usize;
        let test = (n as f64 * self.split_ratio[2] + EPS).floor() as usize;
        (n - dev - test, dev, test)
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("grounding failed {failures} times in {attempts} attempts (over 20%): {by_template:?}")]
    GroundingRate { failures: usize, attempts: usize, by_template: BTreeMap<String, usize> },
    #[error("could not build a {class} instance in {attempts} attempts; rejections: {rejections:?}")]
    Exhausted { class: StructureClass, attempts: usize, rejections: BTreeMap<String, usize> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

/// Summary of one generation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub n_instances: usize,
    pub class_targets: BTreeMap<String, usize>,
    pub class_counts: BTreeMap<String, usize>,
    pub question_types: BTreeMap<String, usize>,
    pub distractors: BTreeMap<String, usize>,
    pub splits: SplitSizes,
    pub attempts: usize,
    pub grounding_failures: usize,
    pub rejections: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<QaInstance>,
    pub dev: Vec<QaInstance>,
    pub test: Vec<QaInstance>,
    pub report: GenReport,
}

impl Dataset {
    pub fn all(&self) -> impl Iterator<Item = &QaInstance> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }
}

const MAX_ATTEMPTS: usize = 200;
const MAX_FAILURE_RATE: f64 = 0.2;

enum Outcome {
    Built(Box<QaInstance>),
    GroundingFailed,
    Rejected(&'static str),
}

/// Store-derived state shared by every instance of a run.
pub struct Generator<'s> {
    store: &'s TripleStore,
    pools: Pools,
    lexicon: Lexicon,
}

impl<'s> Generator<'s> {
    pub fn new(store: &'s TripleStore) -> Self {
        Self { store, pools: Pools::new(store), lexicon: Lexicon::new(store) }
    }

    pub fn generate(&self, cfg: &GenConfig) -> Result<Dataset, GenerateError> {
        cfg.validate()?;
        let quotas = cfg.class_quotas();
        let mut plan: Vec<StructureClass> = quotas.iter().flat_map(|(&c, &k)| std::iter::repeat_n(c, k)).collect();
        plan.shuffle(&mut seed::rng(cfg.rng_seed, &[seed::hash_str("classes")]));

        let mut report = GenReport {
            n_instances: cfg.n_instances,
            class_targets: quotas.iter().map(|(c, &k)| (c.to_string(), k)).collect(),
            ..GenReport::default()
        };
        let mut failures_by_template: BTreeMap<String, usize> = BTreeMap::new();
        let mut instances = Vec::with_capacity(cfg.n_instances);
        for (i, &class) in plan.iter().enumerate() {
            let mut built = None;
            for attempt in 0..MAX_ATTEMPTS {
                report.attempts += 1;
                let base = seed::mix(cfg.rng_seed, &[i as u64, attempt as u64]);
                let mut rng = seed::rng(base, &[0]);
                let template = *Template::for_class(class).choose(&mut rng).expect("every class has templates");
                match self.attempt(i, class, template, base, &mut rng, cfg) {
                    Outcome::Built(inst) => {
                        built = Some(*inst);
                        break;
                    }
                    Outcome::GroundingFailed => {
                        report.grounding_failures += 1;
                        *failures_by_template.entry(template.name().to_string()).or_default() += 1;
                    }
                    Outcome::Rejected(why) => *report.rejections.entry(why.to_string()).or_default() += 1,
                }
            }
            let inst = built.ok_or_else(|| GenerateError::Exhausted {
                class,
                attempts: MAX_ATTEMPTS,
                rejections: report.rejections.clone(),
            })?;
            instances.push(inst);
        }
        if report.grounding_failures as f64 > MAX_FAILURE_RATE * report.attempts as f64 {
            return Err(GenerateError::GroundingRate {
                failures: report.grounding_failures,
                attempts: report.attempts,
                by_template: failures_by_template,
            });
        }

        for inst in &instances {
            *report.class_counts.entry(inst.structure_class.to_string()).or_default() += 1;
            *report.question_types.entry(inst.question_type.to_string()).or_default() += 1;
            for f in inst.database.facts() {
                if let Some(k) = f.distractor_kind {
                    *report.distractors.entry(kind_name(k).to_string()).or_default() += 1;
                }
            }
        }

        let (n_train, n_dev, _) = cfg.split_sizes();
        let mut order: Vec<usize> = (0..instances.len()).collect();
        order.shuffle(&mut seed::rng(cfg.rng_seed, &[seed::hash_str("splits")]));
        let mut split_of = vec![0u8; instances.len()];
        for (pos, &i) in order.iter().enumerate() {
            split_of[i] = if pos < n_train {
                0
            } else if pos < n_train + n_dev {
                1
            } else {
                2
            };
        }
        let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for (inst, s) in instances.into_iter().zip(split_of) {
            match s {
                0 => train.push(inst),
                1 => dev.push(inst),
                _ => test.push(inst),
            }
        }
        report.splits = SplitSizes { train: train.len(), dev: dev.len(), test: test.len() };
        Ok(Dataset { train, dev, test, report })
    }

    fn attempt(
        &self,
        index: usize,
        class: StructureClass,
        template: Template,
        base: u64,
        rng: &mut rand_chacha::ChaCha8Rng,
        cfg: &GenConfig,
    ) -> Outcome {
        let Some(draft) = templates::draft(template, self.store, &self.pools, rng) else {
            return Outcome::Rejected("no_anchor");
        };
        let grounding = match ground_program(&draft.program, self.store) {
            Ok(g) => g,
            Err(err) => {
                tracing::debug!(template = template.name(), %err, "grounding failed");
                return Outcome::GroundingFailed;
            }
        };
        let gold_triples: Vec<Triple> = grounding.triples().into_iter().cloned().collect();
        if gold_triples.is_empty() {
            return Outcome::Rejected("no_evidence");
        }
        if gold_triples.len() + 3 > cfg.db_size {
            return Outcome::Rejected("db_too_small");
        }

        let relations = draft.program.relations();
        let gold_set: BTreeSet<&Triple> = gold_triples.iter().collect();
        let mut bundled: BTreeSet<Triple> = BTreeSet::new();
        let mut facts: Vec<Fact> = Vec::new();
        for (k, t) in gold_triples.iter().enumerate() {
            let mut provenance = vec![t.clone()];
            if rng.gen_bool(cfg.bundle_probability) {
                let mut extras: Vec<&Triple> = self
                    .store
                    .with_head(t.head())
                    .filter(|x| !relations.contains(x.relation()) && !gold_set.contains(x) && !bundled.contains(*x))
                    .collect();
                extras.shuffle(rng);
                let take = rng.gen_range(1..=2);
                for x in extras.into_iter().take(take) {
                    bundled.insert(x.clone());
                    provenance.push(x.clone());
                }
            }
            let text = verbalize(&provenance, seed::mix(base, &[1, k as u64])).expect("same-head bundle");
            facts.push(Fact { id: FactId(0), text, is_distractor: false, distractor_kind: None, provenance });
        }

        let n_distractors = ((cfg.db_size - facts.len()) as f64 * cfg.distractor_ratio).round() as usize;
        let distractors = inject_distractors(
            &draft.question,
            &draft.program,
            &facts,
            self.store,
            &self.lexicon,
            n_distractors,
            seed::mix(base, &[2]),
        );
        if distractors.facts.len() < n_distractors {
            return Outcome::Rejected("store_exhausted");
        }
        // a backfilled database would break the equal-thirds split; retry
        if distractors.backfilled > 0 {
            return Outcome::Rejected("same_head_shortfall");
        }
        facts.extend(distractors.facts);
        facts.shuffle(rng);
        let mut fact_of = BTreeMap::new();
        for (id, f) in facts.iter_mut().enumerate() {
            f.id = FactId(id as u32);
            if !f.is_distractor {
                for t in &f.provenance {
                    if gold_set.contains(t) {
                        fact_of.insert(t.clone(), f.id);
                    }
                }
            }
        }
        let gold_graph = match build_gold_graph(&grounding, &fact_of) {
            Ok(g) => g,
            Err(GoldError::NoEvidence) => return Outcome::Rejected("no_evidence"),
            Err(GoldError::TooManyLeaves(_)) => return Outcome::Rejected("too_many_leaves"),
            Err(_) => return Outcome::Rejected("constraint_violation"),
        };
        let database = match TextualDatabase::new(facts) {
            Ok(db) => db,
            Err(_) => return Outcome::Rejected("constraint_violation"),
        };
        if !validate_graph(&gold_graph, &database).is_empty() {
            return Outcome::Rejected("constraint_violation");
        }
        match structure_class_of(&gold_graph) {
            Ok(c) if c == class => {}
            _ => return Outcome::Rejected("class_mismatch"),
        }
        let instance = QaInstance {
            id: index.to_string(),
            question: draft.question,
            answer: grounding.answer,
            gold_graph,
            program: draft.program,
            question_type: draft.question_type,
            structure_class: class,
            database,
        };
        if crate::reader::read(&instance, &instance.gold_graph) != instance.answer {
            return Outcome::Rejected("reader_mismatch");
        }
        Outcome::Built(Box::new(instance))
    }
}

fn kind_name(k: DistractorKind) -> &'static str {
    match k {
        DistractorKind::Semantic => "semantic",
        DistractorKind::SameHead => "same_head",
        DistractorKind::Random => "random",
    }
}

/// Generates a dataset from `store` under `cfg`.
pub fn generate(store: &TripleStore, cfg: &GenConfig) -> Result<Dataset, GenerateError> {
    Generator::new(store).generate(cfg)
}

/// Question-type counts of a dataset, in canonical order.
pub fn question_type_counts<'a>(it: impl IntoIterator<Item = &'a QaInstance>) -> BTreeMap<QuestionType, usize> {
    let mut out = BTreeMap::new();
    for inst in it {
        *out.entry(inst.question_type).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotas_and_splits() {
        let cfg = GenConfig { n_instances: 200, ..GenConfig::default() };
        let q = cfg.class_quotas();
        assert_eq!(q.values().sum::<usize>(), 200);
        assert_eq!(
            [q[&StructureClass::ScSh], q[&StructureClass::ScMh], q[&StructureClass::McSh], q[&StructureClass::McMh]],
            [39, 77, 17, 67]
        );
        assert_eq!(GenConfig { n_instances: 10, ..GenConfig::default() }.split_sizes(), (8, 1, 1));
        assert_eq!(GenConfig { n_instances: 1000, ..GenConfig::default() }.split_sizes(), (800, 100, 100));
        assert_eq!(GenConfig { n_instances: 15, ..GenConfig::default() }.split_sizes(), (13, 1, 1));
    }

    #[test]
    fn bad_configs_name_the_field() {
        let mut cfg = GenConfig::default();
        cfg.structure_mix.sc_sh = 0.5;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().starts_with("structure_mix"), "{err}");
        let cfg = GenConfig { split_ratio: [0.5, 0.1, 0.1], ..GenConfig::default() };
        assert!(cfg.validate().unwrap_err().to_string().starts_with("split_ratio"));
        let cfg = GenConfig { db_size: 3, ..GenConfig::default() };
        assert!(cfg.validate().unwrap_err().to_string().starts_with("db_size"));
    }

    #[test]
    fn small_run_is_consistent() {
        let store = TripleStore::bundled();
        let cfg = GenConfig { n_instances: 40, rng_seed: 5, ..GenConfig::default() };
        let ds = generate(&store, &cfg).unwrap();
        assert_eq!(ds.report.splits, SplitSizes { train: 32, dev: 4, test: 4 });
        for inst in ds.all() {
            assert_eq!(inst.database.len(), 25);
            assert!(validate_graph(&inst.gold_graph, &inst.database).is_empty());
            assert_eq!(crate::reader::read(inst, &inst.gold_graph), inst.answer);
        }
        let again = generate(&store, &cfg).unwrap();
        assert_eq!(ds.report, again.report);
        assert_eq!(ds.test, again.test);
    }
}
