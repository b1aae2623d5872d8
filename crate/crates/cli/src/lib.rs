//! Config-driven front end: `evaluate`, `optimize`, `sweep` and
//! `reproduce-table`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evaluate,
    Optimize,
    Sweep,
    ReproduceTable,
}

/// Loads the config (if any), applies overrides, runs the command and
/// writes its files. Returns the written paths and the summary line.
pub fn run(command: Command, config: Option<&Path>, overrides: &Overrides) -> Result<(Vec<PathBuf>, String), CliError> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None if command == Command::ReproduceTable => ExperimentConfig::default(),
        None => return Err(CliError::validation("--config is required for this command")),
    };
    cfg.apply(overrides);
    let outcome = match command {
        Command::Evaluate => commands::evaluate(&cfg)?,
        Command::Optimize => commands::optimize(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::ReproduceTable => commands::reproduce_table(&cfg)?,
    };
    let written = output::write_all(&cfg.output_dir(), &outcome.files)?;
    match outcome.failure {
        Some(f) => Err(CliError::Acceptance(format!("{}\n{f}", outcome.summary))),
        None => Ok((written, outcome.summary)),
    }
}
