use prefdyn_harness::{run_experiment, Cell, ExperimentConfig, ExperimentOutput, HarnessError};
use serde_json::Value;

fn run(text: &str) -> ExperimentOutput {
    run_experiment(&ExperimentConfig::from_json(text).unwrap()).unwrap()
}

fn real(c: &Cell) -> f64 {
    match c {
        Cell::Real(x) => *x,
        Cell::Int(i) => *i as f64,
    }
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn single_item_catalog_sends_every_user_to_a_pole() {
    let out = run(
        r#"{"scenario": "ModeCollapse", "dimension": 3, "catalog": "random:1:9", "population": 40,
            "schedule": {"kind": "constant", "eta": 1.0}, "horizon": 200, "seed": 3}"#,
    );
    assert_eq!(out.summary["users_at_pole"], 40);
    assert_eq!(out.summary["distinct_converged_items"], 1);
    assert!(out.summary["clusters"].as_u64().unwrap() <= 2);
}

#[test]
fn population_spread_shrinks_within_clusters() {
    let out = run(
        r#"{"scenario": "ModeCollapse", "dimension": 2, "population": 200, "horizon": 500, "seed": 8,
            "catalog": [[1.0, 0.0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]],
            "schedule": {"kind": "decreasing", "eta": 1, "s": 1}, "emit_every": 500}"#,
    );
    let s = &out.summary;
    assert!(num(s, "spread_shrink_factor") >= 10.0, "{s}");
    assert!(num(s, "final_within_cluster_spread") < 0.05);
}

#[test]
fn identical_users_follow_identical_trajectories() {
    let out = run(
        r#"{"scenario": "ModeCollapse", "dimension": 3, "catalog": "random:5:1", "population": 4, "p0": [0.0, 0.6, 0.8],
            "schedule": {"kind": "constant", "eta": 0.5}, "horizon": 50, "seed": 2}"#,
    );
    let trial = out.table.column("trial").unwrap();
    let by_user = |u: f64| -> Vec<Vec<f64>> {
        out.table
            .rows
            .iter()
            .filter(|r| real(&r[trial]) == u)
            .map(|r| r.iter().skip(1).map(real).collect())
            .collect()
    };
    let first = by_user(0.0);
    assert_eq!(first.len(), 50);
    for u in 1..4 {
        assert_eq!(by_user(u as f64), first);
    }
}

#[test]
fn seeds_change_outputs_and_trials_are_ordered() {
    let text = r#"{"scenario": "RandomizedRec", "dimension": 3, "catalog": "random:4:8", "weights": [0.4, 0.3, 0.2, 0.1],
        "schedule": {"kind": "decreasing", "eta": 2, "s": 4}, "horizon": 100, "trials": 9, "seed": SEED}"#;
    let a = run(&text.replace("SEED", "1"));
    let b = run(&text.replace("SEED", "2"));
    assert_ne!(a.table, b.table);
    assert_ne!(a.summary["config_sha256"], b.summary["config_sha256"]);
    let trial = a.table.column("trial").unwrap();
    let trials: Vec<f64> = a.table.rows.iter().map(|r| real(&r[trial])).collect();
    assert!(trials.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn noiseless_identification_recovers_start() {
    let out = run(
        r#"{"scenario": "Identify", "dimension": 3, "catalog": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.8, 0.0]],
            "plan": [0, 1, 2, 3, 0, 1], "schedule": {"kind": "constant", "eta": 0.5}, "horizon": 6, "trials": 5, "seed": 7,
            "init_cos": 0.95}"#,
    );
    let s = &out.summary;
    assert_eq!(s["locally_invertible"], 5);
    assert!(num(s, "max_estimation_error") <= 1e-6, "{s}");
    let residual = out.table.column("residual").unwrap();
    assert!(out.table.rows.iter().all(|r| real(&r[residual]).abs() <= 1e-8));
}

#[test]
fn constant_step_randomized_run_has_no_certificate_bound() {
    let out = run(
        r#"{"scenario": "RandomizedRec", "dimension": 2, "catalog": [[0.8660254037844387, 0.5], [0.8660254037844387, -0.5]],
            "weights": [0.5, 0.5], "schedule": {"kind": "constant", "eta": 0.5}, "horizon": 2000, "seed": 9, "p0": [1.0, 0.0]}"#,
    );
    assert!(out.table.column("bound_value").is_none());
    assert!(out.summary.get("coverage_fraction").is_none());
    assert!(num(&out.summary, "mean_tail_range_p_dot_v1") > 0.0);
}

#[test]
fn infeasible_design_is_reported() {
    let config = ExperimentConfig::from_json(
        r#"{"scenario": "DesignAndConverge", "dimension": 2, "catalog": [[1.0, 0.0]], "target": [0.0, 1.0],
            "schedule": {"kind": "decreasing", "eta": 1, "s": 1}, "horizon": 10, "seed": 1}"#,
    )
    .unwrap();
    let err = run_experiment(&config).unwrap_err();
    assert!(matches!(err, HarnessError::Infeasible(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
}
