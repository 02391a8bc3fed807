//! Scenario runners. Each returns a result table with one row per emitted
//! `(trial, t)` and a JSON summary.

mod collapse;
mod etc;
mod fixed;
mod identify;
mod randomized;

use prefdyn_core::geometry::sample_unit_sphere;
use prefdyn_core::UnitVector;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Scenario};
use crate::error::{HarnessError, Result};
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

pub use collapse::{cluster_spread, mean_pairwise_angle};
pub use randomized::design_summary as randomized_design_summary;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub summary: Value,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut out = match config.scenario {
        Scenario::FixedRec => fixed::run(config)?,
        Scenario::RandomizedRec => randomized::run_weighted(config)?,
        Scenario::DesignAndConverge => randomized::run_designed(config)?,
        Scenario::EtcRegret => etc::run(config)?,
        Scenario::Identify => identify::run(config)?,
        Scenario::ModeCollapse => collapse::run(config)?,
    };
    if let Value::Object(map) = &mut out.summary {
        map.insert("scenario".into(), json!(config.scenario));
        map.insert("seed".into(), json!(config.seed));
        map.insert("config_sha256".into(), json!(config.hash()));
        map.insert("rows".into(), json!(out.table.rows.len()));
    }
    Ok(out)
}

/// Runs `trial` for every index in parallel and returns results in trial
/// order.
fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

fn initial_preference(config: &ExperimentConfig, trial: usize) -> Result<UnitVector> {
    match config.p0()? {
        Some(p) => Ok(p),
        None => {
            let mut rng = stream(config.seed, trial as u64, StreamTag::InitialPreference);
            Ok(sample_unit_sphere(config.dimension, &mut rng)?)
        }
    }
}

fn emits(t: usize, last: usize, every: usize) -> bool {
    t.is_multiple_of(every) || t == last
}

fn preference_columns(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("p_{i}")).collect()
}

/// Preference coordinates as cells, checking the unit-norm invariant.
fn preference_cells(p: &UnitVector) -> Result<Vec<Cell>> {
    let norm = p.as_vector().norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(HarnessError::InvariantBreach(format!("preference norm {norm} is not unit")));
    }
    Ok(p.as_slice().iter().map(|&x| Cell::Real(x)).collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn merge(columns: &[String], parts: Vec<ResultTable>) -> ResultTable {
    let mut table = ResultTable::new(columns);
    for part in parts {
        table.append(part);
    }
    table
}
