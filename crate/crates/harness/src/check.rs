//! Quick invariant suite behind `prefdyn check`.

use nalgebra::DVector;
use prefdyn_core::design::{
    build_signed_catalog, check_dominance, conical_hull_weights, conical_weights_from_x, gershgorin_sufficient,
    solve_eig_feasibility, weighted_covariance_condition,
};
use prefdyn_core::dynamics::{closed_form_affinity, simulate};
use prefdyn_core::geometry::sample_unit_sphere;
use prefdyn_core::identification::{local_invertibility_check, observation_jacobian, observation_map, ObservationPlan};
use prefdyn_core::objectives::{fixed_regret_bound, regret, Objective};
use prefdyn_core::policies::FixedPolicy;
use prefdyn_core::{ItemCatalog, StepSizeSchedule, UnitVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CatalogSpec, ExperimentConfig, Scenario, ScheduleSpec};
use crate::csv_header;
use crate::scenarios::run_experiment;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn schedule(rng: &mut ChaCha8Rng) -> StepSizeSchedule {
    if rng.random_bool(0.5) {
        StepSizeSchedule::constant(rng.random_range(0.1..2.0)).expect("positive eta")
    } else {
        StepSizeSchedule::decreasing(rng.random_range(1..4), rng.random_range(1..6)).expect("positive eta")
    }
}

fn fixed_pair(rng: &mut ChaCha8Rng, d: usize) -> (UnitVector, UnitVector) {
    let q = sample_unit_sphere(d, rng).expect("d >= 2");
    loop {
        let p = sample_unit_sphere(d, rng).expect("d >= 2");
        if p.dot(&q) > 0.05 {
            return (p, q);
        }
    }
}

fn closed_form(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let d = rng.random_range(2..=10);
        let (p0, q) = fixed_pair(rng, d);
        let s = schedule(rng);
        let cat = ItemCatalog::new(vec![q.clone()]).expect("one item");
        let traj = simulate(&p0, &cat, &mut FixedPolicy::new(0), s, 1000, rng, 0.0).expect("valid run");
        for (t, p) in traj.preferences.iter().enumerate() {
            let cf = closed_form_affinity(p0.dot(&q), &s, t).expect("positive affinity");
            worst = worst.max((cf - p.dot(&q)).abs());
        }
    }
    CheckResult {
        name: "closed-form affinity matches simulation",
        passed: worst <= 1e-9,
        detail: format!("max deviation {worst:.3e}"),
    }
}

fn fixed_regret(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut violations = 0;
    for _ in 0..20 {
        let d = rng.random_range(2..=6);
        let (p0, q) = fixed_pair(rng, d);
        let s = schedule(rng);
        let cat = ItemCatalog::new(vec![q.clone()]).expect("one item");
        let traj = simulate(&p0, &cat, &mut FixedPolicy::new(0), s, 5000, rng, 0.0).expect("valid run");
        let bound = fixed_regret_bound(p0.dot(&q), &s).expect("positive affinity");
        if regret(&traj, Objective::Affinity).cumulative > bound {
            violations += 1;
        }
    }
    CheckResult {
        name: "fixed-recommendation affinity regret below bound",
        passed: violations == 0,
        detail: format!("{violations} violations in 20 instances"),
    }
}

fn design_equivalences(rng: &mut ChaCha8Rng) -> CheckResult {
    let mut mismatches = 0;
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let n = rng.random_range(1..=18);
        let cat = ItemCatalog::random(d, n, rng).expect("valid catalog");
        let v = sample_unit_sphere(d, rng).expect("d >= 2");
        let signed = build_signed_catalog(&cat, &v).expect("same dimension");
        if solve_eig_feasibility(&cat, &v).is_ok() != conical_hull_weights(&signed, &v).is_ok() {
            mismatches += 1;
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let w = conical_weights_from_x(&cat, &v, &x);
        let by_x = check_dominance(&cat, &x).expect("same length");
        let by_w = weighted_covariance_condition(&signed, &v, &w).expect("same length");
        let gersh = gershgorin_sufficient(&signed, &v, &w).expect("same length");
        if by_x != by_w || (gersh && !by_w) {
            mismatches += 1;
        }
    }
    CheckResult {
        name: "eigenvector design equivalences",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in 100 instances"),
    }
}

fn jacobian(rng: &mut ChaCha8Rng) -> CheckResult {
    let (mut radial, mut fd_err) = (0.0_f64, 0.0_f64);
    let mut spanning_failures = 0;
    let h = 1e-6;
    for _ in 0..20 {
        let d = rng.random_range(2..=6);
        let cat = ItemCatalog::random(d, d, rng).expect("valid catalog");
        let recs: Vec<usize> = (0..2 * d).map(|t| if t < d { t } else { rng.random_range(0..d) }).collect();
        let plan = ObservationPlan::new(recs, cat, StepSizeSchedule::constant(0.5).expect("positive")).expect("plan");
        let p0 = sample_unit_sphere(d, rng).expect("d >= 2");
        let report = local_invertibility_check(&plan, &p0).expect("same dimension");
        radial = radial.max(report.radial_residual);
        spanning_failures += (!report.locally_invertible) as usize;
        let jac = observation_jacobian(&plan, &p0).expect("same dimension");
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = h;
            let up = observation_map(&plan, &UnitVector::new(p0.as_vector() + &e).expect("nonzero")).expect("map");
            let down = observation_map(&plan, &UnitVector::new(p0.as_vector() - &e).expect("nonzero")).expect("map");
            let fd = (up - down) / (2.0 * h);
            for t in 0..fd.len() {
                let scale = jac.row(t).norm().max(1e-3);
                fd_err = fd_err.max((fd[t] - jac[(t, i)]).abs() / scale);
            }
        }
    }
    CheckResult {
        name: "observation Jacobian and local invertibility",
        passed: radial <= 1e-8 && fd_err <= 1e-5 && spanning_failures == 0,
        detail: format!("radial {radial:.2e}, finite-difference {fd_err:.2e}, spanning failures {spanning_failures}"),
    }
}

fn determinism() -> CheckResult {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let config = ExperimentConfig {
        scenario: Scenario::RandomizedRec,
        dimension: 2,
        catalog: CatalogSpec::Explicit(vec![vec![1.0, 0.0], vec![h, h], vec![0.0, 1.0]]),
        schedule: ScheduleSpec::Decreasing { eta: 2, s: 3 },
        horizon: 200,
        trials: 8,
        seed: 77,
        noise_sigma: 0.1,
        p0: None,
        item: None,
        weights: Some(vec![0.6, 0.3, 0.1]),
        target: None,
        delta: None,
        threshold: None,
        warm_start_steps: None,
        etc: None,
        plan: None,
        init_cos: None,
        population: None,
        emit_every: None,
    };
    let render = || {
        run_experiment(&config).map(|out| (out.table.to_csv(&csv_header(&config)), out.summary.to_string()))
    };
    let (passed, detail) = match (render(), render()) {
        (Ok(a), Ok(b)) => (a == b, format!("{} CSV bytes", a.0.len())),
        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
    };
    CheckResult {
        name: "identical config and seed give identical output",
        passed,
        detail,
    }
}

pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        closed_form(&mut rng),
        fixed_regret(&mut rng),
        design_equivalences(&mut rng),
        jacobian(&mut rng),
        determinism(),
    ]
}
