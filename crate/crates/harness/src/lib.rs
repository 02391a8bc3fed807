//! Configuration-driven experiment runner for the preference-dynamics
//! laboratory.
//!
//! A run reads an [`ExperimentConfig`], executes its scenario with every
//! random draw derived from the config seed, and writes `results.csv`
//! (one row per emitted `(trial, t)`) and `summary.json`.

pub mod check;
pub mod config;
pub mod design_cmd;
pub mod error;
pub mod output;
pub mod scenarios;
pub mod streams;

use std::path::Path;

pub use config::{CatalogSpec, EtcSpec, ExperimentConfig, Scenario, ScheduleSpec};
pub use error::{HarnessError, Result};
pub use output::{Cell, ResultTable};
pub use scenarios::{run_experiment, ExperimentOutput};

/// Comment header of the CSV output.
pub fn csv_header(config: &ExperimentConfig) -> String {
    format!(
        "prefdyn scenario={:?}\nconfig_sha256={}\nseed={}",
        config.scenario,
        config.hash(),
        config.seed
    )
}

/// Runs `config` and writes both output files into `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput> {
    let out = run_experiment(config)?;
    output::write_outputs(dir, &csv_header(config), &out.table, &out.summary)?;
    Ok(out)
}
