//! Identifiability of the initial preference from the affinities observed
//! along a fixed recommendation plan.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::design::orthonormal_complement;
use crate::dynamics::{transfer_matrices, TransferMatrixSequence};
use crate::error::{Error, Result};
use crate::geometry::{normalize, sample_unit_sphere, ItemCatalog, StepSizeSchedule, UnitVector};

/// Smallest tangent singular value counted as invertible.
pub const INVERTIBILITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationPlan {
    pub recommendations: Vec<usize>,
    pub catalog: ItemCatalog,
    pub schedule: StepSizeSchedule,
    pub transfer: TransferMatrixSequence,
}

impl ObservationPlan {
    pub fn new(recommendations: Vec<usize>, catalog: ItemCatalog, schedule: StepSizeSchedule) -> Result<Self> {
        schedule.validate()?;
        let transfer = transfer_matrices(&recommendations, &catalog, &schedule)?;
        Ok(ObservationPlan {
            recommendations,
            catalog,
            schedule,
            transfer,
        })
    }

    pub fn horizon(&self) -> usize {
        self.recommendations.len()
    }

    pub fn dim(&self) -> usize {
        self.catalog.dim()
    }

    fn item(&self, t: usize) -> &DVector<f64> {
        self.catalog.items()[self.recommendations[t]].as_vector()
    }
}

/// `y_t = q_t^T Phi_t p / ||Phi_t p||`; accepts any nonzero `p` since the
/// map is scale invariant.
fn observe_raw(plan: &ObservationPlan, p: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(plan.horizon(), |t, _| {
        let phi_p = &plan.transfer.matrices[t] * p;
        plan.item(t).dot(&phi_p) / phi_p.norm()
    })
}

pub fn observation_map(plan: &ObservationPlan, p0: &UnitVector) -> Result<DVector<f64>> {
    p0.check_dim(plan.dim())?;
    Ok(observe_raw(plan, p0.as_vector()))
}

/// Row `t` is the gradient of `y_t` with respect to `p`:
/// `(1/||Phi p||) (I - Phi^T Phi p p^T / ||Phi p||^2) Phi^T q_t`.
fn jacobian_raw(plan: &ObservationPlan, p: &DVector<f64>) -> DMatrix<f64> {
    let d = plan.dim();
    let mut jac = DMatrix::zeros(plan.horizon(), d);
    for t in 0..plan.horizon() {
        let phi = &plan.transfer.matrices[t];
        let q = plan.item(t);
        let phi_p = phi * p;
        let n = phi_p.norm();
        let a = phi.transpose() * q;
        let b = phi.transpose() * &phi_p;
        let row = (&a - &b * (p.dot(&a) / (n * n))) / n;
        jac.row_mut(t).copy_from(&row.transpose());
    }
    jac
}

pub fn observation_jacobian(plan: &ObservationPlan, p0: &UnitVector) -> Result<DMatrix<f64>> {
    p0.check_dim(plan.dim())?;
    Ok(jacobian_raw(plan, p0.as_vector()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvertibilityReport {
    pub jacobian: DMatrix<f64>,
    pub tangent_min_singular: f64,
    pub locally_invertible: bool,
    /// `||J p0||`.
    pub radial_residual: f64,
}

fn min_singular(m: &DMatrix<f64>) -> f64 {
    let k = m.ncols();
    if k == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < k {
        return 0.0;
    }
    m.singular_values().min()
}

pub fn local_invertibility_check(plan: &ObservationPlan, p0: &UnitVector) -> Result<InvertibilityReport> {
    let jacobian = observation_jacobian(plan, p0)?;
    let tangent = orthonormal_complement(p0);
    let tangent_min_singular = min_singular(&(&jacobian * tangent));
    Ok(InvertibilityReport {
        radial_residual: (&jacobian * p0.as_vector()).norm(),
        locally_invertible: tangent_min_singular > INVERTIBILITY_TOL,
        tangent_min_singular,
        jacobian,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationOptions {
    pub max_iterations: usize,
    /// Stop once the tangent gradient norm falls to this value.
    pub gradient_tol: f64,
    /// Extra random starts, each paired with its antipode.
    pub random_start_pairs: usize,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        EstimationOptions {
            max_iterations: 200,
            gradient_tol: 1e-10,
            random_start_pairs: 0,
        }
    }
}

struct Run {
    estimate: DVector<f64>,
    residual: f64,
    gradient: f64,
    iterations: usize,
    converged: bool,
}

fn half_sq(plan: &ObservationPlan, p: &DVector<f64>, y: &DVector<f64>) -> f64 {
    0.5 * (observe_raw(plan, p) - y).norm_squared()
}

fn gauss_newton(plan: &ObservationPlan, y: &DVector<f64>, init: &DVector<f64>, options: &EstimationOptions) -> Run {
    let mut p = init.clone();
    let mut value = half_sq(plan, &p, y);
    let mut gradient = f64::INFINITY;
    for iteration in 0..=options.max_iterations {
        let r = observe_raw(plan, &p) - y;
        let basis = orthonormal_complement(&UnitVector::new(p.clone()).expect("iterates stay unit"));
        let jt = jacobian_raw(plan, &p) * &basis;
        let g = jt.transpose() * &r;
        gradient = g.norm();
        if gradient <= options.gradient_tol || value == 0.0 {
            return Run {
                estimate: p,
                residual: r.norm(),
                gradient,
                iterations: iteration,
                converged: true,
            };
        }
        if iteration == options.max_iterations {
            break;
        }
        let svd = jt.svd(true, true);
        let eps = svd.singular_values.max() * 1e-12;
        let delta = match svd.solve(&(-&r), eps) {
            Ok(delta) => delta,
            Err(_) => -&g,
        };
        let dir = &basis * delta;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-12 {
            let trial = (&p + &dir * t).normalize();
            let tv = half_sq(plan, &trial, y);
            if tv < value {
                p = trial;
                value = tv;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Run {
        residual: (2.0 * value).sqrt(),
        estimate: p,
        gradient,
        iterations: options.max_iterations,
        converged: false,
    }
}

/// Least-squares estimate of `p0` from noiseless or noisy affinities by
/// Gauss-Newton on the sphere, retracting by normalization.
///
/// With `random_start_pairs > 0` the given `init`, its antipode, and that
/// many random antipodal pairs drawn from `rng` are all tried; the lowest
/// residual wins, ties going to the earliest start.
pub fn estimate_initial_preference<R: Rng + ?Sized>(
    plan: &ObservationPlan,
    y: &[f64],
    init: &UnitVector,
    options: &EstimationOptions,
    rng: &mut R,
) -> Result<UnitVector> {
    init.check_dim(plan.dim())?;
    if y.len() != plan.horizon() {
        return Err(Error::DimensionMismatch {
            expected: plan.horizon(),
            got: y.len(),
        });
    }
    let y = DVector::from_column_slice(y);
    let mut starts = vec![init.as_vector().clone()];
    if options.random_start_pairs > 0 {
        starts.push(-init.as_vector());
        for _ in 0..options.random_start_pairs {
            let p = sample_unit_sphere(plan.dim(), rng)?.into_vector();
            starts.push(-&p);
            starts.push(p);
        }
    }
    let mut best: Option<Run> = None;
    for start in &starts {
        let run = gauss_newton(plan, &y, start, options);
        let better = match &best {
            None => true,
            Some(b) => (run.converged && !b.converged) || (run.converged == b.converged && run.residual < b.residual),
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    if best.converged {
        normalize(&best.estimate)
    } else {
        Err(Error::DidNotConverge {
            best: best.estimate.as_slice().to_vec(),
            iterations: best.iterations,
            residual: best.residual,
            gradient: best.gradient,
        })
    }
}
