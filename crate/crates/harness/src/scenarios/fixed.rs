use prefdyn_core::dynamics::{closed_form_affinity, simulate};
use prefdyn_core::objectives::{fixed_regret_bound, regret, stationarity_linear_rate, Objective};
use prefdyn_core::policies::fixed_policy;
use serde_json::json;

use super::{emits, initial_preference, mean, merge, preference_cells, preference_columns, run_trials, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

/// Largest tolerated gap between simulation and the closed form.
const CLOSED_FORM_TOL: f64 = 1e-8;

struct Trial {
    table: ResultTable,
    p0_dot_q: f64,
    affinity_regret: f64,
    stationarity_regret: f64,
    bound: Option<f64>,
    closed_form_gap: f64,
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let schedule = config.schedule.build()?;
    let index = config.item.unwrap_or(0);
    let q = catalog.get(index)?.clone();
    let mut columns: Vec<String> = [
        "trial",
        "t",
        "item",
        "affinity",
        "stationarity",
        "closed_form_affinity",
        "cum_regret_affinity",
        "cum_regret_stationarity",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend(preference_columns(config.dimension));
    let horizon = config.horizon;
    let every = config.emit_every();

    let trials = run_trials(config.trials, |trial| {
        let p0 = initial_preference(config, trial)?;
        let mut policy = fixed_policy(index, &catalog)?;
        let mut noise = stream(config.seed, trial as u64, StreamTag::Noise);
        let traj = simulate(&p0, &catalog, &mut policy, schedule, horizon, &mut noise, config.noise_sigma)?;
        let a = p0.dot(&q);
        let aff = regret(&traj, Objective::Affinity);
        let sta = regret(&traj, Objective::Stationarity);
        let mut table = ResultTable::new(&columns);
        let (mut cum_a, mut cum_s, mut gap) = (0.0, 0.0, 0.0_f64);
        for t in 0..horizon {
            cum_a += aff.per_step_regret[t];
            cum_s += sta.per_step_regret[t];
            let cf = if a > 0.0 {
                closed_form_affinity(a, &schedule, t)?
            } else if a < 0.0 {
                -closed_form_affinity(-a, &schedule, t)?
            } else {
                0.0
            };
            gap = gap.max((cf - traj.rewards_affinity[t]).abs());
            if emits(t, horizon - 1, every) {
                let mut row: Vec<Cell> = vec![
                    trial.into(),
                    t.into(),
                    index.into(),
                    traj.rewards_affinity[t].into(),
                    traj.rewards_stationarity[t].into(),
                    cf.into(),
                    cum_a.into(),
                    cum_s.into(),
                ];
                row.extend(preference_cells(&traj.preferences[t])?);
                table.push(row)?;
            }
        }
        if gap > CLOSED_FORM_TOL {
            return Err(HarnessError::InvariantBreach(format!(
                "trial {trial}: simulated affinity deviates from the closed form by {gap:e}"
            )));
        }
        let bound = if a > 0.0 { Some(fixed_regret_bound(a, &schedule)?) } else { None };
        Ok(Trial {
            table,
            p0_dot_q: a,
            affinity_regret: aff.cumulative,
            stationarity_regret: sta.cumulative,
            bound,
            closed_form_gap: gap,
        })
    })?;

    let affinity: Vec<f64> = trials.iter().map(|t| t.affinity_regret).collect();
    let stationarity: Vec<f64> = trials.iter().map(|t| t.stationarity_regret).collect();
    let violations = trials
        .iter()
        .filter(|t| t.bound.is_some_and(|b| t.affinity_regret > b))
        .count();
    let linear_rate = match config.p0()? {
        Some(p0) => {
            let a = p0.dot(&q).abs();
            if a > 0.0 && a < 1.0 {
                Some(stationarity_linear_rate(a, &schedule)?)
            } else {
                None
            }
        }
        None => None,
    };
    let summary = json!({
        "trials": config.trials,
        "horizon": horizon,
        "item": index,
        "mean_affinity_regret": mean(&affinity),
        "mean_stationarity_regret": mean(&stationarity),
        "affinity_bound_violations": violations,
        "affinity_bound_first_trial": trials[0].bound,
        "p0_dot_q_first_trial": trials[0].p0_dot_q,
        "stationarity_linear_rate": linear_rate,
        "max_closed_form_gap": trials.iter().map(|t| t.closed_form_gap).fold(0.0, f64::max),
    });
    Ok(ExperimentOutput {
        table: merge(&columns, trials.into_iter().map(|t| t.table).collect()),
        summary,
    })
}
