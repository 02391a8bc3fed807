use prefdyn_core::dynamics::simulate;
use prefdyn_core::objectives::{fixed_regret_constant, regret, Objective};
use prefdyn_core::policies::{etc_exploration_length, explore_then_commit, EtcConfig};
use serde_json::json;

use super::{emits, initial_preference, mean, merge, preference_cells, preference_columns, run_trials, std_error, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

struct Trial {
    table: ResultTable,
    regret: f64,
    misidentified: bool,
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let schedule = config.schedule.build()?;
    let spec = config.etc.expect("validated");
    let sigma = config.noise_sigma;
    let horizon = config.horizon;
    let etc = EtcConfig {
        i1: spec.i1,
        i2: spec.i2,
        exploration_len: spec
            .exploration_len
            .unwrap_or_else(|| etc_exploration_length(sigma, spec.gap, horizon)),
        horizon,
        sigma,
        gap: spec.gap,
    };
    etc.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let (q1, q2) = (catalog.get(spec.i1)?, catalog.get(spec.i2)?);

    let mut columns: Vec<String> = ["trial", "t", "item", "observation", "affinity", "cum_regret", "committed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend(preference_columns(config.dimension));
    let every = config.emit_every();

    let trials = run_trials(config.trials, |trial| {
        let p0 = initial_preference(config, trial)?;
        let mut choice = stream(config.seed, trial as u64, StreamTag::Policy);
        let mut noise = stream(config.seed, trial as u64, StreamTag::Noise);
        let mut policy = explore_then_commit(etc, &catalog, &mut choice)?;
        let traj = simulate(&p0, &catalog, &mut policy, schedule, horizon, &mut noise, sigma)?;
        let committed = policy.committed().expect("horizon exceeds exploration length");
        let correct = if p0.dot(q1) >= p0.dot(q2) { spec.i1 } else { spec.i2 };
        let report = regret(&traj, Objective::Affinity);
        let mut table = ResultTable::new(&columns);
        let mut cum = 0.0;
        for t in 0..horizon {
            cum += report.per_step_regret[t];
            if emits(t, horizon - 1, every) {
                let committed_cell: i64 = if t >= etc.exploration_len { committed as i64 } else { -1 };
                let mut row: Vec<Cell> = vec![
                    trial.into(),
                    t.into(),
                    traj.recommendations[t].into(),
                    traj.observations[t].into(),
                    traj.rewards_affinity[t].into(),
                    cum.into(),
                    committed_cell.into(),
                ];
                row.extend(preference_cells(&traj.preferences[t])?);
                table.push(row)?;
            }
        }
        Ok(Trial {
            table,
            regret: report.cumulative,
            misidentified: committed != correct,
        })
    })?;

    let n = trials.len() as f64;
    let regrets: Vec<f64> = trials.iter().map(|t| t.regret).collect();
    let rate = trials.iter().filter(|t| t.misidentified).count() as f64 / n;
    let a = spec.gap;
    let failure_bound = if sigma > 0.0 {
        (-a * a * etc.exploration_len as f64 / (sigma * sigma)).exp()
    } else {
        0.0
    };
    let regret_bound =
        2.0 + fixed_regret_constant(&schedule) / a.powi(4) + sigma * sigma * (horizon as f64).ln() / (a * a);
    let summary = json!({
        "trials": config.trials,
        "horizon": horizon,
        "exploration_len": etc.exploration_len,
        "misidentification_rate": rate,
        "misidentification_std_error": (rate * (1.0 - rate) / n).sqrt(),
        "misidentification_bound": failure_bound,
        "mean_regret": mean(&regrets),
        "mean_regret_std_error": std_error(&regrets),
        "regret_bound": regret_bound,
    });
    Ok(ExperimentOutput {
        table: merge(&columns, trials.into_iter().map(|t| t.table).collect()),
        summary,
    })
}
