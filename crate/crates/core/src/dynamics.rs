//! Biased-assimilation preference updates, trajectory simulation and the
//! closed-form trajectory under a fixed recommendation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{ItemCatalog, StepSizeSchedule, UnitVector};
use crate::policies::RecommendationRule;

/// One update `p + eta (p^T q) q`, renormalized. An item orthogonal to `p`
/// leaves it unchanged.
pub fn step(p: &UnitVector, q: &UnitVector, eta: f64) -> Result<UnitVector> {
    q.check_dim(p.dim())?;
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {eta}")));
    }
    let affinity = p.dot(q);
    if affinity == 0.0 {
        return Ok(p.clone());
    }
    let mut next = p.as_vector().clone();
    next.axpy(eta * affinity, q.as_vector(), 1.0);
    UnitVector::new(next)
}

/// Everything observed and hidden along one simulated trajectory.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// `p_0 .. p_T`.
    pub preferences: Vec<UnitVector>,
    /// Catalog indices `q_0 .. q_{T-1}`.
    pub recommendations: Vec<usize>,
    pub schedule: StepSizeSchedule,
    /// `p_t^T q_t`.
    pub rewards_affinity: Vec<f64>,
    /// `p_t^T p_0`.
    pub rewards_stationarity: Vec<f64>,
    /// `y_t = p_t^T q_t + w_t`; equals the affinity reward when noise is off.
    pub observations: Vec<f64>,
    pub noise_sigma: f64,
}

impl TrajectoryRecord {
    pub fn horizon(&self) -> usize {
        self.recommendations.len()
    }

    pub fn initial(&self) -> &UnitVector {
        &self.preferences[0]
    }

    pub fn last(&self) -> &UnitVector {
        &self.preferences[self.preferences.len() - 1]
    }
}

/// Runs `policy` for `horizon` steps from `p0`.
///
/// Observation noise is drawn from `rng`; the policy owns any randomness it
/// needs, so the noise stream and the recommendation stream never interact.
pub fn simulate<R: Rng + ?Sized>(
    p0: &UnitVector,
    catalog: &ItemCatalog,
    policy: &mut dyn RecommendationRule,
    schedule: StepSizeSchedule,
    horizon: usize,
    rng: &mut R,
    noise_sigma: f64,
) -> Result<TrajectoryRecord> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Domain(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    schedule.validate()?;
    p0.check_dim(catalog.dim())?;
    let noise = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|e| Error::Domain(e.to_string()))?)
    } else {
        None
    };

    let mut preferences = Vec::with_capacity(horizon + 1);
    let mut recommendations = Vec::with_capacity(horizon);
    let mut rewards_affinity = Vec::with_capacity(horizon);
    let mut rewards_stationarity = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);

    let mut p = p0.clone();
    for t in 0..horizon {
        let index = policy.recommend(t, &p, catalog)?;
        let q = catalog.get(index)?;
        let affinity = p.dot(q);
        let y = match &noise {
            Some(n) => affinity + n.sample(rng),
            None => affinity,
        };
        policy.observe(t, index, y);

        recommendations.push(index);
        rewards_affinity.push(affinity);
        rewards_stationarity.push(p.dot(p0));
        observations.push(y);

        let next = step(&p, q, schedule.eta_at(t))?;
        preferences.push(std::mem::replace(&mut p, next));
    }
    preferences.push(p);

    Ok(TrajectoryRecord {
        preferences,
        recommendations,
        schedule,
        rewards_affinity,
        rewards_stationarity,
        observations,
        noise_sigma,
    })
}

/// Contraction factor `gamma_t^2` of `(p_t^T q)^{-2} - 1` under a fixed
/// recommendation: `(eta+1)^{-2t}` for constant steps and
/// `prod_{k<eta} ((s+k)/(t+s+k))^2` for decreasing ones.
pub fn gamma_sq(schedule: &StepSizeSchedule, t: usize) -> f64 {
    match *schedule {
        StepSizeSchedule::Constant { eta } => (1.0 + eta).powf(-2.0 * t as f64),
        StepSizeSchedule::Decreasing { eta, s } => {
            let (t, s) = (t as f64, s as f64);
            (0..eta)
                .map(|k| {
                    let k = k as f64;
                    let r = (s + k) / (t + s + k);
                    r * r
                })
                .product()
        }
    }
}

fn check_positive_affinity(p0_dot_q: f64) -> Result<()> {
    if !(p0_dot_q > 0.0 && p0_dot_q <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "p0^T q must lie in (0, 1], got {p0_dot_q} (flip q for negative affinity)"
        )));
    }
    Ok(())
}

/// `p_t^T q` under the fixed recommendation `q`, given `p_0^T q > 0`.
pub fn closed_form_affinity(p0_dot_q: f64, schedule: &StepSizeSchedule, t: usize) -> Result<f64> {
    check_positive_affinity(p0_dot_q)?;
    let a = p0_dot_q.min(1.0);
    let gap = (a * a).recip() - 1.0;
    Ok((1.0 + gamma_sq(schedule, t) * gap).sqrt().recip())
}

/// Coefficients `(alpha_t, beta_t)` with `p_t = alpha_t p_0 + beta_t q`.
pub fn closed_form_coefficients(
    p0: &UnitVector,
    q: &UnitVector,
    schedule: &StepSizeSchedule,
    t: usize,
) -> Result<(f64, f64)> {
    q.check_dim(p0.dim())?;
    let a = p0.dot(q);
    if (a.abs() - 1.0).abs() <= 1e-12 {
        return Err(Error::DegenerateSpan);
    }
    check_positive_affinity(a)?;
    Ok(coefficients_from_gamma(a, gamma_sq(schedule, t).sqrt()))
}

fn coefficients_from_gamma(a: f64, gamma: f64) -> (f64, f64) {
    let a2 = a * a;
    let denom = (a2 + gamma * gamma * (1.0 - a2)).sqrt();
    (gamma / denom, a * (1.0 - gamma) / denom)
}

/// `p_0^T p_t` under the fixed recommendation `q`, given `a = p_0^T q`.
pub fn closed_form_stationarity(p0_dot_q: f64, schedule: &StepSizeSchedule, t: usize) -> Result<f64> {
    check_positive_affinity(p0_dot_q)?;
    Ok(stationarity_from_gamma(p0_dot_q.min(1.0), gamma_sq(schedule, t).sqrt()))
}

pub(crate) fn stationarity_from_gamma(a: f64, gamma: f64) -> f64 {
    let a2 = a * a;
    (gamma + a2 * (1.0 - gamma)) / (a2 + gamma * gamma * (1.0 - a2)).sqrt()
}

/// `Phi_0 = I`, `Phi_{t+1} = (I + eta_t q_t q_t^T) Phi_t`, so that the
/// unnormalized state is `Phi_t p_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrixSequence {
    pub matrices: Vec<DMatrix<f64>>,
}

impl TransferMatrixSequence {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `normalize(Phi_t p0)`.
    pub fn propagate(&self, p0: &UnitVector, t: usize) -> Result<UnitVector> {
        UnitVector::new(&self.matrices[t] * p0.as_vector())
    }
}

pub fn transfer_matrices(
    recommendations: &[usize],
    catalog: &ItemCatalog,
    schedule: &StepSizeSchedule,
) -> Result<TransferMatrixSequence> {
    let d = catalog.dim();
    let mut matrices = Vec::with_capacity(recommendations.len() + 1);
    let mut phi = DMatrix::<f64>::identity(d, d);
    matrices.push(phi.clone());
    for (t, &index) in recommendations.iter().enumerate() {
        let q = catalog.get(index)?.as_vector();
        let qt_phi = q.transpose() * &phi;
        phi += q * qt_phi * schedule.eta_at(t);
        matrices.push(phi.clone());
    }
    Ok(TransferMatrixSequence { matrices })
}

/// Coefficients of the least-squares fit `p ~ c0 * p0 + c1 * u` together with
/// the residual norm. Used to check that trajectories stay in the cone
/// spanned by `p0` and `u`.
pub fn cone_coefficients(p: &UnitVector, p0: &UnitVector, u: &DVector<f64>) -> (f64, f64, f64) {
    let x = p0.as_vector();
    let g00 = x.dot(x);
    let g01 = x.dot(u);
    let g11 = u.dot(u);
    let b0 = x.dot(p.as_vector());
    let b1 = u.dot(p.as_vector());
    let det = g00 * g11 - g01 * g01;
    let c0 = (b0 * g11 - b1 * g01) / det;
    let c1 = (g00 * b1 - g01 * b0) / det;
    let residual = (p.as_vector() - x * c0 - u * c1).norm();
    (c0, c1, residual)
}

/// Monotone helper functions used in the fixed-recommendation analysis:
/// `f1(x) = x / r(x)`, `f2(x) = (1 - x) / r(x)`, `f3(x) = (x + a^2 (1 - x)) / r(x)`
/// with `r(x) = sqrt(a + x^2 (1 - a))`.
pub mod monotone {
    fn radical(a: f64, x: f64) -> f64 {
        (a + x * x * (1.0 - a)).sqrt()
    }

    pub fn f1(a: f64, x: f64) -> f64 {
        x / radical(a, x)
    }

    pub fn f2(a: f64, x: f64) -> f64 {
        (1.0 - x) / radical(a, x)
    }

    pub fn f3(a: f64, x: f64) -> f64 {
        (x + a * a * (1.0 - x)) / radical(a, x)
    }
}

/// Upper bound on `|q^T (pbar_t - p_t)|` for two fixed-recommendation
/// trajectories started on the same side of `q`:
/// `gamma_t^2 |q^T (pbar_0 - p_0)| / ((pbar_0^T q)^2 (p_0^T q)^2)`.
pub fn trajectory_gap_bound(
    p0_dot_q: f64,
    pbar0_dot_q: f64,
    schedule: &StepSizeSchedule,
    t: usize,
) -> Result<f64> {
    if !(p0_dot_q * pbar0_dot_q > 0.0) {
        return Err(Error::Domain(
            "both initial preferences must lie on the same side of q".into(),
        ));
    }
    let (a, b) = (p0_dot_q * p0_dot_q, pbar0_dot_q * pbar0_dot_q);
    Ok(gamma_sq(schedule, t) * (pbar0_dot_q - p0_dot_q).abs() / (a * b))
}
