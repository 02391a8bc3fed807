//! Reward and regret accounting for the affinity and stationarity
//! objectives, and the analytic regret constants for fixed recommendations.

use std::f64::consts::PI;

use crate::dynamics::{gamma_sq, stationarity_from_gamma, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::geometry::StepSizeSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Reward `p_t^T q_t`.
    Affinity,
    /// Reward `p_t^T p_0`.
    Stationarity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretReport {
    pub objective: Objective,
    /// `1 - r_t` for `t = 0 .. T-1`.
    pub per_step_regret: Vec<f64>,
    pub cumulative: f64,
    /// Analytic bound, when one applies.
    pub bound: Option<f64>,
}

impl RegretReport {
    /// Cumulative regret over the first `t` steps.
    pub fn cumulative_at(&self, t: usize) -> f64 {
        self.per_step_regret[..t].iter().sum()
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.cumulative <= b)
    }
}

/// Regret against the optimal reward of one per step.
pub fn regret(traj: &TrajectoryRecord, objective: Objective) -> RegretReport {
    let rewards = match objective {
        Objective::Affinity => &traj.rewards_affinity,
        Objective::Stationarity => &traj.rewards_stationarity,
    };
    let per_step_regret: Vec<f64> = rewards.iter().map(|r| 1.0 - r).collect();
    let cumulative = per_step_regret.iter().sum();
    RegretReport {
        objective,
        per_step_regret,
        cumulative,
        bound: None,
    }
}

/// `sum_t gamma_t^2` bound: `(eta+1)^2 / (eta^2 + 2 eta)` for constant steps
/// and `s^2 pi^2 / 6` for decreasing ones.
pub fn fixed_regret_constant(schedule: &StepSizeSchedule) -> f64 {
    match *schedule {
        StepSizeSchedule::Constant { eta } => (eta + 1.0).powi(2) / (eta * eta + 2.0 * eta),
        StepSizeSchedule::Decreasing { s, .. } => {
            let s = s as f64;
            s * s * PI * PI / 6.0
        }
    }
}

/// Bound on the affinity regret of recommending a fixed `q` with
/// `p_0^T q > 0`: `C_gamma ((p_0^T q)^{-2} - 1)`.
pub fn fixed_regret_bound(p0_dot_q: f64, schedule: &StepSizeSchedule) -> Result<f64> {
    if !(p0_dot_q > 0.0 && p0_dot_q <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("p0^T q must lie in (0, 1], got {p0_dot_q}")));
    }
    let a = p0_dot_q.min(1.0);
    Ok(fixed_regret_constant(schedule) * ((a * a).recip() - 1.0))
}

/// Slope `C = (1 - C_1) / 2` of the linear lower bound on stationarity
/// regret for a fixed item, where `C_1 = p_0^T p_1` evaluated in closed form.
pub fn stationarity_linear_rate(p0_dot_q: f64, schedule: &StepSizeSchedule) -> Result<f64> {
    if !(p0_dot_q > 0.0 && p0_dot_q < 1.0) {
        return Err(Error::Domain(format!("p0^T q must lie in (0, 1), got {p0_dot_q}")));
    }
    let c1 = stationarity_from_gamma(p0_dot_q, gamma_sq(schedule, 1).sqrt());
    Ok((1.0 - c1) / 2.0)
}

/// Minimum of `a x + b y` over the arc `{x, y >= 0, x^2 + y^2 - 2 c x y = 1}`
/// by a parametric sweep of `samples` directions in the first quadrant.
///
/// Along direction `phi` the arc sits at radius `1 / sqrt(1 - c sin(2 phi))`;
/// directions where that radius is unbounded (`c = 1`, `phi = pi/4`) are
/// skipped.
pub fn ellipse_arc_min(a: f64, b: f64, c: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    (0..n)
        .filter_map(|k| {
            let phi = std::f64::consts::FRAC_PI_2 * k as f64 / (n - 1) as f64;
            let denom = 1.0 - c * (2.0 * phi).sin();
            if denom <= 0.0 {
                return None;
            }
            let r = denom.sqrt().recip();
            Some(a * r * phi.cos() + b * r * phi.sin())
        })
        .fold(f64::INFINITY, f64::min)
}
