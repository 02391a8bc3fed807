use nalgebra::DVector;
use prefdyn_core::design::orthonormal_complement;
use prefdyn_core::identification::{
    estimate_initial_preference, local_invertibility_check, observation_map, EstimationOptions, ObservationPlan,
};
use prefdyn_core::{Error as CoreError, UnitVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use super::{initial_preference, mean, merge, run_trials, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

const RADIAL_TOL: f64 = 1e-8;

struct Trial {
    table: ResultTable,
    error: f64,
    converged: bool,
    tangent_min_singular: f64,
    invertible: bool,
}

/// A point with inner product `cos` with `p`, in a random tangent direction.
fn tilted<R: Rng>(p: &UnitVector, cos: f64, rng: &mut R) -> Result<UnitVector> {
    let basis = orthonormal_complement(p);
    let mix = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
    let dir = basis * mix;
    let dir = dir.normalize();
    Ok(UnitVector::new(p.as_vector() * cos + dir * (1.0 - cos * cos).sqrt())?)
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let schedule = config.schedule.build()?;
    let horizon = config.horizon;
    let init_cos = config.init_cos.unwrap_or(0.95);
    let columns: Vec<String> = ["trial", "t", "item", "observation", "fitted", "residual"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let noise = if config.noise_sigma > 0.0 {
        Some(Normal::new(0.0, config.noise_sigma).map_err(|e| HarnessError::Config(e.to_string()))?)
    } else {
        None
    };

    let trials = run_trials(config.trials, |trial| {
        let recs = match &config.plan {
            Some(plan) => plan.clone(),
            None => {
                let mut rng = stream(config.seed, trial as u64, StreamTag::Plan);
                (0..horizon).map(|_| rng.random_range(0..catalog.len())).collect()
            }
        };
        let plan = ObservationPlan::new(recs, catalog.clone(), schedule)?;
        let p0 = initial_preference(config, trial)?;
        let report = local_invertibility_check(&plan, &p0)?;
        if report.radial_residual > RADIAL_TOL {
            return Err(HarnessError::InvariantBreach(format!(
                "trial {trial}: radial residual {:e} exceeds {RADIAL_TOL:e}",
                report.radial_residual
            )));
        }
        let clean = observation_map(&plan, &p0)?;
        let mut noise_rng = stream(config.seed, trial as u64, StreamTag::Noise);
        let y: Vec<f64> = clean
            .iter()
            .map(|v| v + noise.as_ref().map_or(0.0, |n| n.sample(&mut noise_rng)))
            .collect();
        let mut init_rng = stream(config.seed, trial as u64, StreamTag::EstimatorInit);
        let init = tilted(&p0, init_cos, &mut init_rng)?;
        let (estimate, converged) =
            match estimate_initial_preference(&plan, &y, &init, &EstimationOptions::default(), &mut init_rng) {
                Ok(p) => (p, true),
                Err(CoreError::DidNotConverge { best, .. }) => (UnitVector::from_slice(&best)?, false),
                Err(e) => return Err(e.into()),
            };
        let fitted = observation_map(&plan, &estimate)?;
        let mut table = ResultTable::new(&columns);
        for t in 0..horizon {
            table.push(vec![
                trial.into(),
                t.into(),
                plan.recommendations[t].into(),
                y[t].into(),
                fitted[t].into(),
                Cell::Real(y[t] - fitted[t]),
            ])?;
        }
        Ok(Trial {
            table,
            error: estimate.distance(&p0),
            converged,
            tangent_min_singular: report.tangent_min_singular,
            invertible: report.locally_invertible,
        })
    })?;

    let errors: Vec<f64> = trials.iter().map(|t| t.error).collect();
    let summary = json!({
        "trials": config.trials,
        "horizon": horizon,
        "init_cos": init_cos,
        "estimation_errors": errors,
        "max_estimation_error": errors.iter().cloned().fold(0.0, f64::max),
        "mean_estimation_error": mean(&errors),
        "recovered_within_1e-6": errors.iter().filter(|&&e| e <= 1e-6).count(),
        "converged": trials.iter().filter(|t| t.converged).count(),
        "locally_invertible": trials.iter().filter(|t| t.invertible).count(),
        "min_tangent_singular": trials.iter().map(|t| t.tangent_min_singular).fold(f64::INFINITY, f64::min),
    });
    Ok(ExperimentOutput {
        table: merge(&columns, trials.into_iter().map(|t| t.table).collect()),
        summary,
    })
}
