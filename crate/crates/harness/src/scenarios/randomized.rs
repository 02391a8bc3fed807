use prefdyn_core::design::{design_self_aligned, maximize_eigengap, DesignSolution, EigengapOptions};
use prefdyn_core::dynamics::simulate;
use prefdyn_core::policies::{
    convergence_certificate, fixed_policy, randomized_policy, self_aligned_check, stationarity_regret_bound,
    warm_start_item, ConvergenceCertificate, ProbabilityWeighting,
};
use prefdyn_core::{ItemCatalog, StepSizeSchedule, UnitVector};
use serde_json::{json, Value};

use super::{
    emits, initial_preference, mean, median, merge, preference_cells, preference_columns, run_trials, ExperimentOutput,
};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

struct Trial {
    table: ResultTable,
    covered: bool,
    final_p_dot_v1: f64,
    stationarity_regret: f64,
    regret_bound: f64,
    /// Range of `p_t^T v1` over the second half of the main phase.
    tail_range: f64,
}

pub(super) fn run_weighted(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let weights = config.weights.clone().unwrap_or_default();
    let weighting = ProbabilityWeighting::new(weights, &catalog)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    run(config, &catalog, &weighting, None, None)
}

pub(super) fn run_designed(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let target = config.target()?.expect("validated");
    let options = EigengapOptions {
        seed: config.seed,
        ..EigengapOptions::default()
    };
    let design = match config.threshold {
        Some(th) => design_self_aligned(&catalog, &target, th, &options)?,
        None => maximize_eigengap(&catalog, &target, &options)?,
    };
    let weighting = design.alpha.clone();
    run(config, &catalog, &weighting, Some(&design), Some(&target))
}

pub fn design_summary(design: &DesignSolution) -> Value {
    json!({
        "x": design.x,
        "alpha": design.alpha.alpha(),
        "support": design.support(),
        "lambda1": design.lambda1,
        "residual": design.residual,
        "dominant": design.dominant,
        "eigengap": design.eigengap,
        "self_aligned_support": design.self_aligned_support,
    })
}

fn certificate_summary(cert: &ConvergenceCertificate) -> Value {
    json!({
        "v1": cert.v1.as_slice(),
        "lambda1": cert.lambda1,
        "lambda2": cert.lambda2,
        "eigengap": cert.eigengap(),
        "spread": cert.spread,
        "eta_min": cert.eta_min,
        "s_min": cert.s_min,
        "delta": cert.delta,
        "eta": cert.eta,
        "s": cert.s,
        "verified": cert.verified,
    })
}

fn run(
    config: &ExperimentConfig,
    catalog: &ItemCatalog,
    weighting: &ProbabilityWeighting,
    design: Option<&DesignSolution>,
    target: Option<&UnitVector>,
) -> Result<ExperimentOutput> {
    let schedule = config.schedule.build()?;
    let horizon = config.horizon;
    let base = convergence_certificate(weighting, catalog, horizon, config.delta())?;
    if let Some(v) = target {
        if base.eigengap() > 1e-8 && base.v1.dot(v).abs() < 1.0 - 1e-6 {
            return Err(HarnessError::InvariantBreach(format!(
                "designed weighting's top eigenvector deviates from the target (|v1^T v| = {})",
                base.v1.dot(v).abs()
            )));
        }
    }
    // bounds only exist for decreasing schedules
    let cert = match schedule {
        StepSizeSchedule::Decreasing { .. } => Some(base.for_schedule(&schedule)?),
        StepSizeSchedule::Constant { .. } => None,
    };
    let warm = config.warm_start_steps.unwrap_or(0);

    let mut columns: Vec<String> = ["trial", "t", "phase", "item", "affinity", "stationarity", "p_dot_v1", "one_minus_sq"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if cert.is_some() {
        columns.push("bound_value".into());
        columns.push("within_bound".into());
    }
    columns.extend(preference_columns(config.dimension));
    let every = config.emit_every();
    let support = weighting.support();

    let trials = run_trials(config.trials, |trial| {
        let p0 = match (config.p0()?, target) {
            (Some(p), _) => p,
            (None, Some(v)) => v.clone(),
            (None, None) => initial_preference(config, trial)?,
        };
        let v1 = base.v1_towards(&p0);
        let mut noise = stream(config.seed, trial as u64, StreamTag::Noise);
        let mut table = ResultTable::new(&columns);

        // optional warm start on the item closest to v1, then re-index time
        let mut start = p0.clone();
        if warm > 0 {
            let item = warm_start_item(catalog, &v1)?;
            let mut policy = fixed_policy(item, catalog)?;
            let traj = simulate(&p0, catalog, &mut policy, schedule, warm, &mut noise, config.noise_sigma)?;
            for t in 0..warm {
                if emits(t, warm - 1, every) {
                    let p = &traj.preferences[t];
                    let pv = p.dot(&v1);
                    let mut row: Vec<Cell> = vec![
                        trial.into(),
                        t.into(),
                        0usize.into(),
                        item.into(),
                        traj.rewards_affinity[t].into(),
                        p.dot(&p0).into(),
                        pv.into(),
                        (1.0 - pv * pv).into(),
                    ];
                    if cert.is_some() {
                        row.push(0.0.into());
                        row.push(true.into());
                    }
                    row.extend(preference_cells(p)?);
                    table.push(row)?;
                }
            }
            start = traj.last().clone();
        }

        let rng = stream(config.seed, trial as u64, StreamTag::Policy);
        let mut policy = randomized_policy(weighting, rng)?;
        let traj = simulate(&start, catalog, &mut policy, schedule, horizon, &mut noise, config.noise_sigma)?;
        let mut covered = true;
        let mut stationarity_regret = 0.0;
        for (t, p) in traj.preferences.iter().enumerate() {
            let pv = p.dot(&v1);
            let deficit = 1.0 - pv * pv;
            let within = cert.as_ref().map(|c| deficit <= c.bound_at(t));
            covered &= within.unwrap_or(true);
            if t == horizon {
                break;
            }
            let stationarity = p.dot(&p0);
            stationarity_regret += 1.0 - stationarity;
            if emits(t, horizon - 1, every) {
                let mut row: Vec<Cell> = vec![
                    trial.into(),
                    (warm + t).into(),
                    1usize.into(),
                    traj.recommendations[t].into(),
                    traj.rewards_affinity[t].into(),
                    stationarity.into(),
                    pv.into(),
                    deficit.into(),
                ];
                if let Some(c) = &cert {
                    row.push(c.bound_at(t).into());
                    row.push(within.unwrap_or(true).into());
                }
                row.extend(preference_cells(p)?);
                table.push(row)?;
            }
        }
        let tail: Vec<f64> = traj.preferences[horizon / 2..].iter().map(|p| p.dot(&v1)).collect();
        let tail_range = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let regret_bound = match &cert {
            Some(c) => stationarity_regret_bound(c, &p0, horizon),
            None => f64::INFINITY,
        };
        Ok(Trial {
            table,
            covered,
            final_p_dot_v1: traj.last().dot(&v1),
            stationarity_regret,
            regret_bound,
            tail_range,
        })
    })?;

    let n = trials.len() as f64;
    let finals: Vec<f64> = trials.iter().map(|t| t.final_p_dot_v1).collect();
    let regrets: Vec<f64> = trials.iter().map(|t| t.stationarity_regret).collect();
    let ranges: Vec<f64> = trials.iter().map(|t| t.tail_range).collect();
    let covered = trials.iter().filter(|t| t.covered).count();
    let cor3_violations = trials.iter().filter(|t| t.stationarity_regret > t.regret_bound).count();
    let reference = config.p0()?.or_else(|| target.cloned()).unwrap_or_else(|| base.v1.clone());
    let self_aligned = self_aligned_check(catalog, &support, &base.v1_towards(&reference))?;

    let mut summary = json!({
        "trials": config.trials,
        "horizon": horizon,
        "warm_start_steps": warm,
        "support": support,
        "self_aligned_support": self_aligned,
        "median_final_p_dot_v1": median(&finals),
        "fraction_final_at_least_0_99": finals.iter().filter(|&&x| x >= 0.99).count() as f64 / n,
        "mean_stationarity_regret": mean(&regrets),
        "mean_tail_range_p_dot_v1": mean(&ranges),
        "certificate": match &cert {
            Some(c) => certificate_summary(c),
            None => certificate_summary(&base),
        },
    });
    if let (Some(c), Value::Object(map)) = (&cert, &mut summary) {
        map.insert("coverage_fraction".into(), json!(covered as f64 / n));
        map.insert("coverage_required".into(), json!(1.0 - c.delta));
        map.insert("stationarity_regret_bound_first_trial".into(), json!(trials[0].regret_bound));
        map.insert("stationarity_bound_violations".into(), json!(cor3_violations));
    }
    if let (Some(d), Value::Object(map)) = (design, &mut summary) {
        map.insert("design".into(), design_summary(d));
    }
    Ok(ExperimentOutput {
        table: merge(&columns, trials.into_iter().map(|t| t.table).collect()),
        summary,
    })
}
