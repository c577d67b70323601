use std::path::Path;

use serde::{Deserialize, Serialize};

use graphhop_core::reconstruct::{check_gamma, FuseMode, DEFAULT_GAMMA};
use graphhop_core::retrieval::RetrievalConfig;
use graphhop_core::scorers::ScorerSpec;
use graphhop_core::synthgen::GenConfig;

use crate::error::{CliError, Result};

/// Settings for `run`, `sweep` and `breakdown`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scorer: ScorerSpec,
    pub gamma: f64,
    pub fuse_mode: FuseMode,
    pub seed: u64,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    pub gamma_grid: Vec<f64>,
    pub retrieval: RetrievalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scorer: ScorerSpec::Bm25,
            gamma: DEFAULT_GAMMA,
            fuse_mode: FuseMode::Union,
            seed: 0,
            workers: 0,
            gamma_grid: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            retrieval: RetrievalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma).map_err(|e| CliError::usage(format!("gamma: {e}")))?;
        if self.gamma_grid.is_empty() {
            return Err(CliError::usage("gamma_grid: must not be empty"));
        }
        for &g in &self.gamma_grid {
            check_gamma(g).map_err(|e| CliError::usage(format!("gamma_grid: {e}")))?;
        }
        self.retrieval.validate().map_err(|e| CliError::usage(format!("retrieval: {e}")))
    }
}

/// The whole configuration file; every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub generate: GenConfig,
    pub run: RunConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        cfg.generate.validate().map_err(|e| CliError::usage(format!("{}: generate.{e}", path.display())))?;
        cfg.run.validate().map_err(|e| CliError::usage(format!("{}: run.{e}", path.display())))?;
        Ok(cfg)
    }
}

/// Parses a comma-separated gamma grid such as `0,0.1,0.5,1`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::usage(format!("gamma grid: bad value {v:?}"))))
        .collect()
}
