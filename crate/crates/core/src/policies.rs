//! Recommendation policies: fixed item, explore-then-commit hemisphere
//! identification and randomized recommendation over a probability
//! weighting, plus the convergence certificate for the randomized policy.

use std::f64::consts::E;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{symmetric_eig, ItemCatalog, StepSizeSchedule, UnitVector};

/// Chooses the catalog index recommended at each step.
///
/// `current` is the user's present preference. Partial-observation policies
/// ignore it and rely on [`RecommendationRule::observe`] instead.
pub trait RecommendationRule {
    fn recommend(&mut self, t: usize, current: &UnitVector, catalog: &ItemCatalog) -> Result<usize>;

    /// Called with the observed affinity `y_t` after each recommendation.
    fn observe(&mut self, _t: usize, _index: usize, _y: f64) {}
}

/// Recommends the same item forever.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPolicy {
    index: usize,
}

impl FixedPolicy {
    pub fn new(index: usize) -> Self {
        FixedPolicy { index }
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

impl RecommendationRule for FixedPolicy {
    fn recommend(&mut self, _t: usize, _current: &UnitVector, catalog: &ItemCatalog) -> Result<usize> {
        catalog.get(self.index)?;
        Ok(self.index)
    }
}

pub fn fixed_policy(index: usize, catalog: &ItemCatalog) -> Result<FixedPolicy> {
    catalog.get(index)?;
    Ok(FixedPolicy::new(index))
}

/// Recommends `argmax_i q_i^T p_t`, recomputed every step. Ties go to the
/// lowest index.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyAffinityPolicy;

impl RecommendationRule for GreedyAffinityPolicy {
    fn recommend(&mut self, _t: usize, current: &UnitVector, catalog: &ItemCatalog) -> Result<usize> {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, q) in catalog.items().iter().enumerate() {
            let score = q.dot(current);
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        Ok(best)
    }
}

/// Probability weighting `alpha` over catalog items and its induced
/// covariance `Sigma = sum_i alpha_i q_i q_i^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityWeighting {
    alpha: Vec<f64>,
    covariance: DMatrix<f64>,
}

impl ProbabilityWeighting {
    /// `alpha` must be nonnegative and sum to one within `1e-9`; it is
    /// renormalized exactly.
    pub fn new(alpha: Vec<f64>, catalog: &ItemCatalog) -> Result<Self> {
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeighting(format!("weights sum to {sum}, not 1")));
        }
        Self::from_nonnegative(alpha, catalog)
    }

    /// Normalizes any nonnegative vector with positive mass.
    pub fn from_nonnegative(weights: Vec<f64>, catalog: &ItemCatalog) -> Result<Self> {
        if weights.len() != catalog.len() {
            return Err(Error::DimensionMismatch {
                expected: catalog.len(),
                got: weights.len(),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeighting(format!("negative or non-finite weight {bad}")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidWeighting("weights have no mass".into()));
        }
        let alpha: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let covariance = catalog.weighted_outer(&alpha);
        Ok(ProbabilityWeighting { alpha, covariance })
    }

    pub fn one_hot(index: usize, catalog: &ItemCatalog) -> Result<Self> {
        catalog.get(index)?;
        let mut alpha = vec![0.0; catalog.len()];
        alpha[index] = 1.0;
        Self::new(alpha, catalog)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len()).filter(|&i| self.alpha[i] > 0.0).collect()
    }
}

/// Draws `q_t` i.i.d. from a probability weighting.
#[derive(Clone, Debug)]
pub struct RandomizedPolicy<R> {
    sampler: WeightedIndex<f64>,
    rng: R,
}

impl<R: Rng> RandomizedPolicy<R> {
    pub fn new(weighting: &ProbabilityWeighting, rng: R) -> Result<Self> {
        let sampler =
            WeightedIndex::new(weighting.alpha()).map_err(|e| Error::InvalidWeighting(e.to_string()))?;
        Ok(RandomizedPolicy { sampler, rng })
    }
}

impl<R: Rng> RecommendationRule for RandomizedPolicy<R> {
    fn recommend(&mut self, _t: usize, _current: &UnitVector, _catalog: &ItemCatalog) -> Result<usize> {
        Ok(self.sampler.sample(&mut self.rng))
    }
}

pub fn randomized_policy<R: Rng>(weighting: &ProbabilityWeighting, rng: R) -> Result<RandomizedPolicy<R>> {
    RandomizedPolicy::new(weighting, rng)
}

/// Configuration of the explore-then-commit hemisphere test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtcConfig {
    /// Catalog index of the first candidate item.
    pub i1: usize,
    /// Catalog index of the second candidate item.
    pub i2: usize,
    /// Number of exploration steps `T_e`.
    pub exploration_len: usize,
    pub horizon: usize,
    pub sigma: f64,
    /// Informativeness gap `a`.
    pub gap: f64,
}

impl EtcConfig {
    /// Uses [`etc_exploration_length`] for `T_e`.
    pub fn with_default_exploration(i1: usize, i2: usize, horizon: usize, sigma: f64, gap: f64) -> Self {
        EtcConfig {
            i1,
            i2,
            exploration_len: etc_exploration_length(sigma, gap, horizon),
            horizon,
            sigma,
            gap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.exploration_len && self.exploration_len < self.horizon) {
            return Err(Error::PreconditionFailed(format!(
                "need 1 <= T_e < T, got T_e={} T={}",
                self.exploration_len, self.horizon
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::PreconditionFailed(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.gap > 0.0 && self.gap <= 1.0) {
            return Err(Error::PreconditionFailed(format!("gap must lie in (0, 1], got {}", self.gap)));
        }
        Ok(())
    }
}

/// `ceil(sigma^2 ln(T) / a^2)`, at least one.
pub fn etc_exploration_length(sigma: f64, gap: f64, horizon: usize) -> usize {
    let raw = sigma * sigma * (horizon as f64).ln() / (gap * gap);
    (raw.ceil() as usize).max(1)
}

/// Plays a randomly chosen candidate `q_e` for `T_e` steps while summing the
/// observed affinities, then commits to `q_e` if the sum is nonnegative and
/// to the other candidate otherwise.
#[derive(Clone, Debug)]
pub struct ExploreThenCommit {
    config: EtcConfig,
    explore: usize,
    other: usize,
    sum: f64,
    committed: Option<usize>,
}

impl ExploreThenCommit {
    pub fn explore_index(&self) -> usize {
        self.explore
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn config(&self) -> &EtcConfig {
        &self.config
    }
}

pub fn explore_then_commit<R: Rng + ?Sized>(
    config: EtcConfig,
    catalog: &ItemCatalog,
    rng: &mut R,
) -> Result<ExploreThenCommit> {
    config.validate()?;
    let q1 = catalog.get(config.i1)?;
    let q2 = catalog.get(config.i2)?;
    let cross = q1.dot(q2);
    if !(cross < 0.0) {
        return Err(Error::PreconditionFailed(format!(
            "candidate items need q1^T q2 < 0, got {cross}"
        )));
    }
    let (explore, other) = if rng.random_bool(0.5) {
        (config.i1, config.i2)
    } else {
        (config.i2, config.i1)
    };
    Ok(ExploreThenCommit {
        config,
        explore,
        other,
        sum: 0.0,
        committed: None,
    })
}

impl RecommendationRule for ExploreThenCommit {
    fn recommend(&mut self, t: usize, _current: &UnitVector, _catalog: &ItemCatalog) -> Result<usize> {
        if t < self.config.exploration_len {
            return Ok(self.explore);
        }
        Ok(*self.committed.get_or_insert(if self.sum >= 0.0 {
            self.explore
        } else {
            self.other
        }))
    }

    fn observe(&mut self, t: usize, _index: usize, y: f64) {
        if t < self.config.exploration_len {
            self.sum += y;
            if t + 1 == self.config.exploration_len {
                self.committed = Some(if self.sum >= 0.0 { self.explore } else { self.other });
            }
        }
    }
}

/// Constant in the required lower bound on `s`.
pub const CERTIFICATE_CONSTANT: f64 = 175.0;

/// Requirements and guarantee for the randomized policy to drive `p_t`
/// towards the dominant eigenvector `v1` of `Sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCertificate {
    pub v1: UnitVector,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Spread `M = max(max_j ||q_j q_j^T - Sigma||, lambda1)`.
    pub spread: f64,
    /// `8 / (lambda1 - lambda2)`.
    pub eta_min: f64,
    /// Required `s` at `eta = ceil(eta_min)`.
    pub s_min: f64,
    pub delta: f64,
    pub horizon: usize,
    /// The `eta`, `s` the bound is evaluated with.
    pub eta: f64,
    pub s: f64,
    /// Whether `eta` and `s` meet the requirements.
    pub verified: bool,
}

impl ConvergenceCertificate {
    pub fn eigengap(&self) -> f64 {
        self.lambda1 - self.lambda2
    }

    /// Required `s` for step parameter `eta`:
    /// `1 + 2 C^2 eta^2 M^2 ln(2 C M T eta / delta)`.
    pub fn s_required(&self, eta: f64) -> f64 {
        s_required(eta, self.spread, self.horizon, self.delta)
    }

    /// Re-evaluates the certificate for a decreasing schedule `eta / (t+s)`.
    /// A schedule that misses the requirements still yields a certificate,
    /// marked unverified.
    pub fn for_schedule(&self, schedule: &StepSizeSchedule) -> Result<Self> {
        match *schedule {
            StepSizeSchedule::Decreasing { eta, s } => {
                let eta = eta as f64;
                let s = s as f64;
                let verified = eta >= self.eta_min && s >= self.s_required(eta);
                Ok(ConvergenceCertificate {
                    eta,
                    s,
                    verified,
                    ..self.clone()
                })
            }
            StepSizeSchedule::Constant { .. } => Err(Error::InvalidSchedule(
                "the randomized convergence guarantee needs a decreasing schedule".into(),
            )),
        }
    }

    /// The schedule with `eta = ceil(eta_min)` and `s = ceil(s_min)`, if `s`
    /// is representable.
    pub fn recommended_schedule(&self) -> Option<StepSizeSchedule> {
        let eta = self.eta_min.ceil();
        let s = self.s_min.ceil();
        if eta > u32::MAX as f64 || !(s < u64::MAX as f64) {
            return None;
        }
        StepSizeSchedule::decreasing(eta as u32, s as u64).ok()
    }

    /// `4 e^2 (s + 2) / (s + 1 + t)`, the high-probability bound on
    /// `1 - (p_t^T v1)^2`.
    pub fn bound_at(&self, t: usize) -> f64 {
        4.0 * E * E * (self.s + 2.0) / (self.s + 1.0 + t as f64)
    }

    /// `v1` flipped, if needed, to have nonnegative inner product with `p`.
    pub fn v1_towards(&self, p: &UnitVector) -> UnitVector {
        if self.v1.dot(p) < 0.0 {
            self.v1.neg()
        } else {
            self.v1.clone()
        }
    }
}

fn s_required(eta: f64, spread: f64, horizon: usize, delta: f64) -> f64 {
    let c = CERTIFICATE_CONSTANT;
    let log_arg = 2.0 * c * spread * horizon as f64 * eta / delta;
    1.0 + 2.0 * c * c * eta * eta * spread * spread * log_arg.ln().max(0.0)
}

fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eig(m)?;
    Ok(eig.lambda_max().abs().max(eig.lambda_min().abs()))
}

pub fn convergence_certificate(
    weighting: &ProbabilityWeighting,
    catalog: &ItemCatalog,
    horizon: usize,
    delta: f64,
) -> Result<ConvergenceCertificate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let sigma = weighting.covariance();
    let eig = symmetric_eig(sigma)?;
    let lambda1 = eig.eigenvalues[0];
    let lambda2 = if eig.dim() > 1 { eig.eigenvalues[1] } else { 0.0 };
    let gap = lambda1 - lambda2;
    if gap <= 1e-10 {
        return Err(Error::NoEigengap { gap });
    }
    let v1 = UnitVector::new(eig.eigenvector(0))?;

    let mut spread = lambda1;
    for q in catalog.items() {
        let mut diff = q.as_vector() * q.as_vector().transpose();
        diff -= sigma;
        spread = spread.max(spectral_norm(&diff)?);
    }

    let eta_min = 8.0 / gap;
    let s_min = s_required(eta_min.ceil(), spread, horizon, delta);
    Ok(ConvergenceCertificate {
        v1,
        lambda1,
        lambda2,
        spread,
        eta_min,
        s_min,
        delta,
        horizon,
        eta: eta_min.ceil(),
        s: s_min.ceil(),
        verified: true,
    })
}

/// Pairwise inner products nonnegative within the subset, and every member
/// nonnegative against `v` (tolerance `1e-12`).
pub fn self_aligned_check(catalog: &ItemCatalog, indices: &[usize], v: &UnitVector) -> Result<bool> {
    if indices.is_empty() {
        return Err(Error::PreconditionFailed("subset must be nonempty".into()));
    }
    v.check_dim(catalog.dim())?;
    let items = indices
        .iter()
        .map(|&i| catalog.get(i))
        .collect::<Result<Vec<_>>>()?;
    const TOL: f64 = -1e-12;
    for (k, a) in items.iter().enumerate() {
        if a.dot(v) < TOL {
            return Ok(false);
        }
        if items[k + 1..].iter().any(|b| a.dot(b) < TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `4 e^2 (s+2) (1 + ln((T+s)/s)) + T ||v1 - p0||` with `v1` oriented
/// towards `p0`.
pub fn stationarity_regret_bound(certificate: &ConvergenceCertificate, p0: &UnitVector, horizon: usize) -> f64 {
    let s = certificate.s;
    let t = horizon as f64;
    let v1 = certificate.v1_towards(p0);
    4.0 * E * E * (s + 2.0) * (1.0 + ((t + s) / s).ln()) + t * v1.distance(p0)
}

/// Picks the item with the largest `v^T q` for a warm-start phase; it must
/// exceed `sqrt(2)/2` for the randomized guarantee to apply afterwards.
pub fn warm_start_item(catalog: &ItemCatalog, v: &UnitVector) -> Result<usize> {
    v.check_dim(catalog.dim())?;
    let (best, score) = catalog
        .items()
        .iter()
        .enumerate()
        .map(|(i, q)| (i, q.dot(v)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if score <= std::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::PreconditionFailed(format!(
            "no item has v^T q > sqrt(2)/2 (best {score})"
        )));
    }
    Ok(best)
}
