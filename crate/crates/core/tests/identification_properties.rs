use nalgebra::DVector;
use prefdyn_core::design::orthonormal_complement;
use prefdyn_core::geometry::sample_unit_sphere;
use prefdyn_core::identification::{
    estimate_initial_preference, local_invertibility_check, observation_jacobian, observation_map, EstimationOptions,
    ObservationPlan,
};
use prefdyn_core::{ItemCatalog, StepSizeSchedule, UnitVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_plan(rng: &mut ChaCha8Rng, d: usize, horizon: usize) -> ObservationPlan {
    let n = rng.random_range(1..=2 * d);
    let cat = ItemCatalog::random(d, n, rng).unwrap();
    let schedule = if rng.random_bool(0.5) {
        StepSizeSchedule::constant(rng.random_range(0.05..1.5)).unwrap()
    } else {
        StepSizeSchedule::decreasing(rng.random_range(1..4), rng.random_range(1..6)).unwrap()
    };
    let recs = (0..horizon).map(|_| rng.random_range(0..n)).collect();
    ObservationPlan::new(recs, cat, schedule).unwrap()
}

/// Plan whose first `d` recommendations are distinct random items, so the
/// recommended vectors span the space almost surely.
fn spanning_plan(rng: &mut ChaCha8Rng, d: usize, horizon: usize) -> ObservationPlan {
    let cat = ItemCatalog::random(d, d + 2, rng).unwrap();
    let schedule = StepSizeSchedule::constant(rng.random_range(0.1..1.0)).unwrap();
    let recs = (0..horizon)
        .map(|t| if t < d { t } else { rng.random_range(0..d + 2) })
        .collect();
    ObservationPlan::new(recs, cat, schedule).unwrap()
}

fn near(p0: &UnitVector, cos: f64, rng: &mut ChaCha8Rng) -> UnitVector {
    let basis = orthonormal_complement(p0);
    let mix = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
    let dir = (basis * mix).normalize();
    UnitVector::new(p0.as_vector() * cos + dir * (1.0 - cos * cos).sqrt()).unwrap()
}

#[test]
fn radial_direction_is_in_the_nullspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let d = rng.random_range(2..=8);
        let horizon = rng.random_range(1..=64);
        let plan = random_plan(&mut rng, d, horizon);
        let p0 = sample_unit_sphere(d, &mut rng).unwrap();
        let report = local_invertibility_check(&plan, &p0).unwrap();
        assert!(report.radial_residual <= 1e-8, "{}", report.radial_residual);
        assert_eq!(report.locally_invertible, report.tangent_min_singular > 1e-8);
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let horizon = rng.random_range(1..=30);
        let plan = random_plan(&mut rng, d, horizon);
        let p0 = sample_unit_sphere(d, &mut rng).unwrap();
        let jac = observation_jacobian(&plan, &p0).unwrap();
        let mut fd = jac.clone();
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = h;
            let up = observation_map(&plan, &UnitVector::new(p0.as_vector() + &e).unwrap()).unwrap();
            let down = observation_map(&plan, &UnitVector::new(p0.as_vector() - &e).unwrap()).unwrap();
            fd.set_column(i, &((up - down) / (2.0 * h)));
        }
        for t in 0..horizon {
            let row = jac.row(t);
            let err = (row - fd.row(t)).norm();
            let scale = row.norm().max(1e-3);
            assert!(err / scale <= 1e-5, "t={t} err={err} row={}", row.norm());
        }
    }
}

#[test]
fn spanning_plans_are_locally_invertible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let d = rng.random_range(2..=8);
        let horizon = rng.random_range(d..=4 * d);
        let plan = spanning_plan(&mut rng, d, horizon);
        let p0 = sample_unit_sphere(d, &mut rng).unwrap();
        assert!(local_invertibility_check(&plan, &p0).unwrap().locally_invertible);
    }
}

#[test]
fn noiseless_round_trip_recovers_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let options = EstimationOptions::default();
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let plan = spanning_plan(&mut rng, d, 3 * d);
        let p0 = sample_unit_sphere(d, &mut rng).unwrap();
        let y = observation_map(&plan, &p0).unwrap();
        let init = near(&p0, rng.random_range(0.9..0.999), &mut rng);
        let est = estimate_initial_preference(&plan, y.as_slice(), &init, &options, &mut rng).unwrap();
        assert!(est.distance(&p0) <= 1e-6, "error {}", est.distance(&p0));
    }
}

#[test]
fn noisy_round_trip_is_logged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = 1e-3;
    let noise = Normal::new(0.0, sigma).unwrap();
    let plan = spanning_plan(&mut rng, 3, 50);
    let p0 = sample_unit_sphere(3, &mut rng).unwrap();
    let y: Vec<f64> = observation_map(&plan, &p0)
        .unwrap()
        .iter()
        .map(|v| v + noise.sample(&mut rng))
        .collect();
    let init = near(&p0, 0.95, &mut rng);
    let options = EstimationOptions {
        max_iterations: 200,
        gradient_tol: 1e-10,
        random_start_pairs: 0,
    };
    match estimate_initial_preference(&plan, &y, &init, &options, &mut rng) {
        Ok(est) => println!("noisy recovery error {:.3e} (10 sigma = {:.1e})", est.distance(&p0), 10.0 * sigma),
        Err(e) => println!("noisy recovery did not converge: {e}"),
    }
}
