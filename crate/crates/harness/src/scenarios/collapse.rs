use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;
use prefdyn_core::dynamics::simulate;
use prefdyn_core::policies::GreedyAffinityPolicy;
use prefdyn_core::UnitVector;
use serde_json::json;

use super::{emits, initial_preference, merge, preference_cells, preference_columns, run_trials, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{Cell, ResultTable};
use crate::streams::{stream, StreamTag};

/// Mean angle over all unordered pairs.
pub fn mean_pairwise_angle(points: &[UnitVector]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            total += a.angle_to(b);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Mean angle from each point to the normalized mean of its cluster.
/// Clusters whose points cancel out contribute their mean angle to the
/// first member instead.
pub fn cluster_spread<K: Ord + Clone>(points: &[UnitVector], labels: &[K]) -> f64 {
    let mut clusters: BTreeMap<K, Vec<&UnitVector>> = BTreeMap::new();
    for (p, k) in points.iter().zip(labels) {
        clusters.entry(k.clone()).or_default().push(p);
    }
    let mut total = 0.0;
    for members in clusters.values() {
        let sum = members
            .iter()
            .fold(DVector::zeros(members[0].dim()), |acc, p| acc + p.as_vector());
        let centre = UnitVector::new(sum).unwrap_or_else(|_| members[0].clone());
        total += members.iter().map(|p| p.angle_to(&centre)).sum::<f64>();
    }
    total / points.len() as f64
}

struct User {
    table: ResultTable,
    initial: UnitVector,
    last: UnitVector,
    final_item: usize,
    final_affinity: f64,
}

pub(super) fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let catalog = config.catalog.build(config.dimension)?;
    let schedule = config.schedule.build()?;
    let horizon = config.horizon;
    let population = config.population.expect("validated");
    let mut columns: Vec<String> = ["trial", "t", "item", "affinity"].iter().map(|s| s.to_string()).collect();
    columns.extend(preference_columns(config.dimension));
    let every = config.emit_every();

    let users = run_trials(population, |user| {
        let p0 = initial_preference(config, user)?;
        let mut noise = stream(config.seed, user as u64, StreamTag::Noise);
        let traj = simulate(&p0, &catalog, &mut GreedyAffinityPolicy, schedule, horizon, &mut noise, config.noise_sigma)?;
        let mut table = ResultTable::new(&columns);
        for t in 0..horizon {
            if emits(t, horizon - 1, every) {
                let mut row: Vec<Cell> = vec![
                    user.into(),
                    t.into(),
                    traj.recommendations[t].into(),
                    traj.rewards_affinity[t].into(),
                ];
                row.extend(preference_cells(&traj.preferences[t])?);
                table.push(row)?;
            }
        }
        let final_item = traj.recommendations[horizon - 1];
        Ok(User {
            table,
            final_affinity: traj.last().dot(catalog.get(final_item)?),
            initial: p0,
            last: traj.last().clone(),
            final_item,
        })
    })?;

    let initial: Vec<UnitVector> = users.iter().map(|u| u.initial.clone()).collect();
    let last: Vec<UnitVector> = users.iter().map(|u| u.last.clone()).collect();
    // users collapsing onto +q and -q of the same item form separate clusters
    let labels: Vec<(usize, bool)> = users.iter().map(|u| (u.final_item, u.final_affinity >= 0.0)).collect();
    let items: BTreeSet<usize> = users.iter().map(|u| u.final_item).collect();
    let initial_spread = cluster_spread(&initial, &labels);
    let final_spread = cluster_spread(&last, &labels);
    let summary = json!({
        "population": population,
        "horizon": horizon,
        "catalog_size": catalog.len(),
        "initial_mean_pairwise_angle": mean_pairwise_angle(&initial),
        "final_mean_pairwise_angle": mean_pairwise_angle(&last),
        "distinct_converged_items": items.len(),
        "clusters": labels.iter().collect::<BTreeSet<_>>().len(),
        "initial_within_cluster_spread": initial_spread,
        "final_within_cluster_spread": final_spread,
        "spread_shrink_factor": if final_spread > 0.0 { initial_spread / final_spread } else { f64::MAX },
        "users_at_pole": users.iter().filter(|u| u.final_affinity.abs() >= 0.99).count(),
    });
    Ok(ExperimentOutput {
        table: merge(&columns, users.into_iter().map(|u| u.table).collect()),
        summary,
    })
}
