//! Command-line harness: dataset generation, retrieval runs, gamma sweeps
//! and per-class breakdowns, each writing structured and tabular reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use error::{CliError, Result};
