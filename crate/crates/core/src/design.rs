//! Designing probability weightings that make a target direction `v` the
//! dominant eigenvector of the recommendation covariance.
//!
//! A nonnegative `x` with `Q diag(Q^T v) x = v` makes `v` an eigenvector of
//! `Sigma = Q diag(alpha) Q^T`, `alpha = x / 1^T x`, with eigenvalue
//! `(1^T x)^{-1}`; it is the dominant one iff `I - Q diag(x) Q^T` is PSD.
//! Every [`DesignSolution`] handed out by this module is recomputed from
//! scratch by [`certify`], so solver inaccuracy can only cost eigengap, never
//! correctness of the reported flags.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use crate::error::{Error, Result};
use crate::geometry::{symmetric_eig, ItemCatalog, UnitVector};
use crate::nnls::nnls;
use crate::policies::{self_aligned_check, ProbabilityWeighting};

/// Largest residual `||Q diag(Q^T v) x - v||` accepted as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Slack on PSD tests.
pub const PSD_TOL: f64 = 1e-9;
/// Items with `|q^T v|` at or below this are treated as orthogonal to `v`.
const ORTHOGONAL_TOL: f64 = 1e-12;

/// A certified candidate weighting for target `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSolution {
    /// Nonnegative weights in `C_eig` scaling.
    pub x: Vec<f64>,
    pub alpha: ProbabilityWeighting,
    /// `(1^T x)^{-1}`, the eigenvalue of `Sigma` along `v`.
    pub lambda1: f64,
    /// `||Q diag(Q^T v) x - v||`.
    pub residual: f64,
    pub dominant: bool,
    /// `lambda_1 - lambda_2` of `Sigma`, from a fresh eigendecomposition.
    pub eigengap: f64,
    pub self_aligned_support: bool,
}

impl DesignSolution {
    pub fn feasible(&self) -> bool {
        self.residual <= FEASIBILITY_TOL
    }

    pub fn support(&self) -> Vec<usize> {
        self.alpha.support()
    }
}

/// `Q diag(Q^T v)`: column `i` is `(q_i^T v) q_i`.
pub fn eigen_constraint_matrix(catalog: &ItemCatalog, v: &UnitVector) -> DMatrix<f64> {
    let mut a = catalog.matrix().clone();
    for (i, q) in catalog.items().iter().enumerate() {
        let s = q.dot(v);
        a.column_mut(i).scale_mut(s);
    }
    a
}

/// Recomputes every field of a [`DesignSolution`] from `x`.
pub fn certify(catalog: &ItemCatalog, v: &UnitVector, x: &[f64]) -> Result<DesignSolution> {
    v.check_dim(catalog.dim())?;
    let a = eigen_constraint_matrix(catalog, v);
    let xv = DVector::from_column_slice(x);
    let residual = (&a * &xv - v.as_vector()).norm();
    let mass: f64 = x.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Infeasible { residual });
    }
    let alpha = ProbabilityWeighting::from_nonnegative(x.to_vec(), catalog)?;
    let eig = symmetric_eig(alpha.covariance())?;
    let support = alpha.support();
    Ok(DesignSolution {
        x: x.to_vec(),
        lambda1: mass.recip(),
        residual,
        dominant: check_dominance(catalog, x)?,
        eigengap: eig.eigengap(),
        self_aligned_support: self_aligned_check(catalog, &support, v)?,
        alpha,
    })
}

/// Item `i` flipped to `sgn(v^T q_i) q_i`, with `sgn(0) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedCatalog {
    pub catalog: ItemCatalog,
    pub flips: Vec<bool>,
}

pub fn build_signed_catalog(catalog: &ItemCatalog, v: &UnitVector) -> Result<SignedCatalog> {
    v.check_dim(catalog.dim())?;
    let mut flips = Vec::with_capacity(catalog.len());
    let items = catalog
        .items()
        .iter()
        .map(|q| {
            let flip = q.dot(v) < 0.0;
            flips.push(flip);
            if flip {
                q.neg()
            } else {
                q.clone()
            }
        })
        .collect();
    Ok(SignedCatalog {
        catalog: ItemCatalog::new(items)?,
        flips,
    })
}

/// Finds `x >= 0` with `Q diag(Q^T v) x = v` by nonnegative least squares.
pub fn solve_eig_feasibility(catalog: &ItemCatalog, v: &UnitVector) -> Result<DesignSolution> {
    v.check_dim(catalog.dim())?;
    let a = eigen_constraint_matrix(catalog, v);
    let sol = nnls(&a, v.as_vector());
    if sol.residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible {
            residual: sol.residual,
        });
    }
    certify(catalog, v, sol.x.as_slice())
}

/// `lambda_min(I - Q diag(x) Q^T) >= -1e-9`.
pub fn check_dominance(catalog: &ItemCatalog, x: &[f64]) -> Result<bool> {
    if x.len() != catalog.len() {
        return Err(Error::DimensionMismatch {
            expected: catalog.len(),
            got: x.len(),
        });
    }
    let d = catalog.dim();
    let m = DMatrix::identity(d, d) - catalog.weighted_outer(x);
    Ok(symmetric_eig(&m)?.lambda_min() >= -PSD_TOL)
}

/// Nonnegative `w` with `v = sum_i w_i qbar_i`.
pub fn conical_hull_weights(signed: &SignedCatalog, v: &UnitVector) -> Result<Vec<f64>> {
    v.check_dim(signed.catalog.dim())?;
    let sol = nnls(signed.catalog.matrix(), v.as_vector());
    if sol.residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible {
            residual: sol.residual,
        });
    }
    Ok(sol.x.as_slice().to_vec())
}

/// `w_i = x_i |q_i^T v|`.
pub fn conical_weights_from_x(catalog: &ItemCatalog, v: &UnitVector, x: &[f64]) -> Vec<f64> {
    catalog
        .items()
        .iter()
        .zip(x)
        .map(|(q, xi)| xi * q.dot(v).abs())
        .collect()
}

/// `x_i = w_i / |q_i^T v|` (zero where `q_i` is orthogonal to `v`).
pub fn x_from_conical_weights(catalog: &ItemCatalog, v: &UnitVector, w: &[f64]) -> Vec<f64> {
    catalog
        .items()
        .iter()
        .zip(w)
        .map(|(q, wi)| {
            let s = q.dot(v).abs();
            if s > ORTHOGONAL_TOL {
                wi / s
            } else {
                0.0
            }
        })
        .collect()
}

fn positive_support(w: &[f64]) -> Vec<usize> {
    (0..w.len()).filter(|&i| w[i] > 0.0).collect()
}

/// Row-sum test `w_i sum_{j in I+} |q_i^T q_j| <= |q_i^T v|` for every
/// `i` in the support; sufficient (not necessary) for dominance.
pub fn gershgorin_sufficient(signed: &SignedCatalog, v: &UnitVector, w: &[f64]) -> Result<bool> {
    v.check_dim(signed.catalog.dim())?;
    let items = signed.catalog.items();
    if w.len() != items.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            got: w.len(),
        });
    }
    let support = positive_support(w);
    Ok(support.iter().all(|&i| {
        let row: f64 = support.iter().map(|&j| items[i].dot(&items[j]).abs()).sum();
        w[i] * row <= items[i].dot(v).abs() + PSD_TOL
    }))
}

/// Dominance expressed on the conical weights: is
/// `B = diag(|q_i^T v|) - diag(w) G` (restricted to the support, `G` the Gram
/// matrix) free of negative eigenvalues?
///
/// `B` is not symmetric, but it is similar to the symmetric
/// `diag(|q_i^T v|) - diag(sqrt w) G diag(sqrt w)` through
/// `diag(w)^{-1/2} B diag(w)^{1/2}`, which is what gets decomposed.
pub fn weighted_covariance_condition(signed: &SignedCatalog, v: &UnitVector, w: &[f64]) -> Result<bool> {
    v.check_dim(signed.catalog.dim())?;
    let items = signed.catalog.items();
    if w.len() != items.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            got: w.len(),
        });
    }
    let support = positive_support(w);
    if support.is_empty() {
        return Ok(true);
    }
    let k = support.len();
    let b = DMatrix::from_fn(k, k, |r, c| {
        let (i, j) = (support[r], support[c]);
        let diag = if r == c { items[i].dot(v).abs() } else { 0.0 };
        diag - (w[i] * w[j]).sqrt() * items[i].dot(&items[j])
    });
    Ok(symmetric_eig(&b)?.lambda_min() >= -PSD_TOL)
}

/// Sum of the `k` largest eigenvalues.
pub fn top_k_eigsum(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    let d = a.nrows();
    if k < 1 || k > d {
        return Err(Error::BadK { k, d });
    }
    Ok(symmetric_eig(a)?.eigenvalues.rows(0, k).sum())
}

/// Greedy self-aligned subset: walk items by decreasing `q^T v`, admitting
/// an item when `q^T v >= threshold` and it has nonnegative inner product
/// with everything admitted so far.
pub fn select_self_aligned_subset(catalog: &ItemCatalog, v: &UnitVector, threshold: f64) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::Domain(format!("threshold must lie in [0, 1), got {threshold}")));
    }
    v.check_dim(catalog.dim())?;
    let items = catalog.items();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| items[j].dot(v).total_cmp(&items[i].dot(v)).then(i.cmp(&j)));
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if items[i].dot(v) < threshold {
            break;
        }
        if chosen.iter().all(|&j| items[i].dot(&items[j]) >= 0.0) {
            chosen.push(i);
        }
    }
    if chosen.is_empty() {
        return Err(Error::EmptySelection);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigengapOptions {
    /// Number of starting points, the feasibility solution included.
    pub starts: usize,
    pub seed: u64,
    /// Smoothing temperatures for the log-sum-exp surrogate of the largest
    /// off-target eigenvalue, visited in order.
    pub temperatures: Vec<f64>,
    pub max_iters_per_temperature: usize,
}

impl Default for EigengapOptions {
    fn default() -> Self {
        EigengapOptions {
            starts: 8,
            seed: 0x5eed,
            temperatures: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            max_iters_per_temperature: 300,
        }
    }
}

/// Ascent problem in probability space.
///
/// On `{alpha >= 0, 1^T alpha = 1, (I - v v^T) Q diag(Q^T v) alpha = 0}`
/// the target `v` is an eigenvector of `Sigma` with eigenvalue
/// `c^T alpha`, `c_i = (q_i^T v)^2`, and the remaining spectrum is that of
/// `U^T Sigma U` for an orthonormal basis `U` of `v`'s complement. The
/// objective `c^T alpha - lambda_max(U^T Sigma U)` is concave, equals the
/// eigengap when `v` is dominant and is negative exactly when it is not.
struct GapProblem<'a> {
    catalog: &'a ItemCatalog,
    complement: DMatrix<f64>,
    target_weight: DVector<f64>,
    constraints: DMatrix<f64>,
    rhs: DVector<f64>,
    pinned: Vec<bool>,
}

impl<'a> GapProblem<'a> {
    fn new(catalog: &'a ItemCatalog, v: &UnitVector) -> Result<Self> {
        let d = catalog.dim();
        let n = catalog.len();
        let complement = orthonormal_complement(v);
        let a = eigen_constraint_matrix(catalog, v);
        let projected = complement.transpose() * &a;
        let mut constraints = DMatrix::zeros(d, n);
        constraints.rows_mut(0, d - 1).copy_from(&projected);
        constraints.row_mut(d - 1).fill(1.0);
        let mut rhs = DVector::zeros(d);
        rhs[d - 1] = 1.0;
        let target_weight = DVector::from_iterator(n, catalog.items().iter().map(|q| q.dot(v).powi(2)));
        let pinned = catalog.items().iter().map(|q| q.dot(v).abs() <= ORTHOGONAL_TOL).collect();
        Ok(GapProblem {
            catalog,
            complement,
            target_weight,
            constraints,
            rhs,
            pinned,
        })
    }

    fn off_target_spectrum(&self, alpha: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let sigma = self.catalog.weighted_outer(alpha.as_slice());
        let restricted = self.complement.transpose() * sigma * &self.complement;
        let eig = symmetric_eig(&restricted)?;
        Ok((eig.eigenvalues, &self.complement * eig.eigenvectors))
    }

    /// Smoothed objective and its gradient at temperature `tau`.
    fn smoothed(&self, alpha: &DVector<f64>, tau: f64) -> Result<(f64, DVector<f64>)> {
        let (mu, dirs) = self.off_target_spectrum(alpha)?;
        let top = mu[0];
        let weights: Vec<f64> = mu.iter().map(|m| ((m - top) / tau).exp()).collect();
        let z: f64 = weights.iter().sum();
        let value = self.target_weight.dot(alpha) - (top + tau * z.ln());
        let q = self.catalog.matrix();
        let mut grad = self.target_weight.clone();
        for (j, wj) in weights.iter().enumerate() {
            let pj = wj / z;
            if pj < 1e-300 {
                continue;
            }
            let proj = q.transpose() * dirs.column(j);
            for i in 0..grad.len() {
                grad[i] -= pj * proj[i] * proj[i];
            }
        }
        Ok((value, grad))
    }

    /// Projects `g` onto the null space of the equality constraints and the
    /// bound constraints in `active`.
    fn project(&self, g: &DVector<f64>, active: &[bool]) -> DVector<f64> {
        let rows = self.stacked(active);
        let basis = row_space_basis(&rows);
        g - &basis * (basis.transpose() * g)
    }

    fn stacked(&self, active: &[bool]) -> DMatrix<f64> {
        let n = self.constraints.ncols();
        let act: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let mut rows = DMatrix::zeros(self.constraints.nrows() + act.len(), n);
        rows.rows_mut(0, self.constraints.nrows()).copy_from(&self.constraints);
        for (k, &i) in act.iter().enumerate() {
            rows[(self.constraints.nrows() + k, i)] = 1.0;
        }
        rows
    }

    /// Bound multipliers for the active set in `g = C^T y + sum mu_i e_i`.
    fn bound_multipliers(&self, g: &DVector<f64>, active: &[bool]) -> Vec<(usize, f64)> {
        let rows = self.stacked(active);
        let svd = rows.transpose().svd(true, true);
        let eps = svd.singular_values.max() * 1e-10;
        let Ok(y) = svd.solve(g, eps) else {
            return Vec::new();
        };
        let m = self.constraints.nrows();
        (0..active.len())
            .filter(|&i| active[i])
            .enumerate()
            .map(|(k, i)| (i, y[m + k]))
            .collect()
    }

    /// Restores `C alpha = b` on the current support by a minimum-norm
    /// correction, keeping the candidate only if it stays nonnegative.
    fn polish(&self, alpha: &DVector<f64>) -> DVector<f64> {
        let n = alpha.len();
        let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
        if free.is_empty() {
            return alpha.clone();
        }
        let sub = self.constraints.select_columns(free.iter());
        let r = &self.rhs - &self.constraints * alpha;
        let svd = sub.svd(true, true);
        let eps = svd.singular_values.max() * 1e-12;
        let Ok(delta) = svd.solve(&r, eps) else {
            return alpha.clone();
        };
        let mut out = alpha.clone();
        for (k, &i) in free.iter().enumerate() {
            out[i] += delta[k];
        }
        if out.iter().all(|&x| x >= 0.0) {
            out
        } else {
            alpha.clone()
        }
    }

    /// Releases the active bound with the largest positive multiplier.
    fn release_one(&self, grad: &DVector<f64>, active: &mut [bool]) -> bool {
        let release = self
            .bound_multipliers(grad, active)
            .into_iter()
            .filter(|&(i, mu)| !self.pinned[i] && mu > 1e-12)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match release {
            Some((i, _)) => {
                active[i] = false;
                true
            }
            None => false,
        }
    }

    fn ascend(&self, start: DVector<f64>, options: &EigengapOptions, mut visit: impl FnMut(&DVector<f64>)) -> Result<()> {
        let n = start.len();
        let mut alpha = start;
        for i in 0..n {
            if self.pinned[i] {
                alpha[i] = 0.0;
            }
        }
        let mut active: Vec<bool> = (0..n).map(|i| self.pinned[i] || alpha[i] <= 0.0).collect();
        for &tau in &options.temperatures {
            let mut step_len: f64 = 1.0;
            let (mut value, mut grad) = self.smoothed(&alpha, tau)?;
            let mut stalled = 0;
            for _ in 0..options.max_iters_per_temperature {
                let mut dir = self.project(&grad, &active);
                // stationary on the current face: leave it through the bound
                // whose multiplier says the objective grows off it
                if stalled >= 2 || dir.norm() <= 1e-12 * (1.0 + grad.norm()) {
                    if !self.release_one(&grad, &mut active) {
                        break;
                    }
                    stalled = 0;
                    dir = self.project(&grad, &active);
                }
                let mut max_step = f64::INFINITY;
                let mut blocking = None;
                for i in 0..n {
                    if !active[i] && dir[i] < 0.0 {
                        let limit = alpha[i] / -dir[i];
                        if limit < max_step {
                            max_step = limit;
                            blocking = Some(i);
                        }
                    }
                }
                if max_step <= 0.0 {
                    if let Some(i) = blocking {
                        alpha[i] = 0.0;
                        active[i] = true;
                    }
                    continue;
                }
                let slope = grad.dot(&dir);
                let mut t = (2.0 * step_len).min(max_step);
                let mut accepted = None;
                while t > 1e-16 {
                    let mut trial = &alpha + &dir * t;
                    trial.iter_mut().for_each(|x| *x = x.max(0.0));
                    let (tv, tg) = self.smoothed(&trial, tau)?;
                    if tv >= value + 1e-4 * t * slope {
                        accepted = Some((trial, tv, tg));
                        break;
                    }
                    t *= 0.5;
                }
                let Some((trial, tv, tg)) = accepted else {
                    stalled = 2;
                    continue;
                };
                let hit_bound = t >= max_step;
                alpha = trial;
                if hit_bound {
                    if let Some(i) = blocking {
                        alpha[i] = 0.0;
                        active[i] = true;
                    }
                }
                step_len = t.max(1e-8);
                let gain = tv - value;
                value = tv;
                grad = tg;
                visit(&alpha);
                if gain <= 1e-14 * (1.0 + value.abs()) && !hit_bound {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
            }
            visit(&self.polish(&alpha));
        }
        Ok(())
    }
}

/// Orthonormal basis (`d x (d-1)`) of the complement of `v`, from the
/// Householder reflection that maps `e_1` to `v`.
pub fn orthonormal_complement(v: &UnitVector) -> DMatrix<f64> {
    let d = v.dim();
    let x = v.as_vector();
    let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = x.clone();
    u[0] += sign;
    let unorm2 = u.norm_squared();
    // H = I - 2 u u^T / |u|^2 maps e_1 to -sign * v; columns 1.. span v's complement
    let h = DMatrix::identity(d, d) - (&u * u.transpose()) * (2.0 / unorm2);
    h.columns(1, d - 1).into_owned()
}

fn row_space_basis(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = rows.transpose().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > smax * 1e-10)
        .collect();
    u.select_columns(keep.iter())
}

fn to_alpha(x: &[f64]) -> DVector<f64> {
    let total: f64 = x.iter().sum();
    DVector::from_iterator(x.len(), x.iter().map(|v| v / total))
}

/// Converts a probability vector on the feasible set back to `C_eig` scale.
fn alpha_to_x(problem: &GapProblem<'_>, alpha: &DVector<f64>) -> Option<Vec<f64>> {
    let lambda = problem.target_weight.dot(alpha);
    if !(lambda > 0.0) {
        return None;
    }
    Some(alpha.iter().map(|a| a.max(0.0) / lambda).collect())
}

/// Random feasible starting points: feasibility solutions for randomly
/// rescaled columns, mixed with Dirichlet weights.
fn random_starts(catalog: &ItemCatalog, v: &UnitVector, base: &DVector<f64>, options: &EigengapOptions) -> Vec<DVector<f64>> {
    let mut rng = StdRng::seed_from_u64(options.seed);
    let a = eigen_constraint_matrix(catalog, v);
    let n = catalog.len();
    let mut vertices = vec![base.clone()];
    for _ in 0..(3 * options.starts) {
        let scale: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
        let mut scaled = a.clone();
        for (i, s) in scale.iter().enumerate() {
            scaled.column_mut(i).scale_mut(*s);
        }
        let sol = nnls(&scaled, v.as_vector());
        if sol.residual <= FEASIBILITY_TOL {
            let x: Vec<f64> = (0..n).map(|i| sol.x[i] * scale[i]).collect();
            vertices.push(to_alpha(&x));
        }
    }
    let mut starts = Vec::new();
    for _ in 1..options.starts {
        let mix: Vec<f64> = vertices.iter().map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
        let total: f64 = mix.iter().sum();
        let mut alpha = DVector::zeros(n);
        for (vtx, m) in vertices.iter().zip(&mix) {
            alpha += vtx * (m / total);
        }
        starts.push(alpha);
    }
    starts
}

/// Searches `C_eig ∩ C_dom` for the weighting with the largest eigengap.
///
/// Runs projected ascent on a smoothed concave surrogate from the
/// feasibility solution and `options.starts - 1` random feasible points.
/// Every iterate is certified and the best certified one returned; the
/// feasibility solution itself is a candidate, so the result never has a
/// smaller eigengap than it when it is dominant.
pub fn maximize_eigengap(catalog: &ItemCatalog, v: &UnitVector, options: &EigengapOptions) -> Result<DesignSolution> {
    let baseline = solve_eig_feasibility(catalog, v)?;
    let problem = GapProblem::new(catalog, v)?;
    let base_alpha = DVector::from_column_slice(baseline.alpha.alpha());

    let mut best: Option<DesignSolution> = None;
    let mut consider = |candidate: DesignSolution| {
        if !(candidate.feasible() && candidate.dominant) {
            return;
        }
        let better = match &best {
            None => true,
            Some(b) => candidate.eigengap > b.eigengap,
        };
        if better {
            best = Some(candidate);
        }
    };
    consider(baseline.clone());

    let mut starts = vec![base_alpha.clone()];
    if options.starts > 1 {
        starts.extend(random_starts(catalog, v, &base_alpha, options));
    }

    for start in starts {
        let mut last: Option<DVector<f64>> = None;
        let mut best_surrogate = f64::NEG_INFINITY;
        let mut candidates = Vec::new();
        problem.ascend(start, options, |alpha| {
            // exact objective, cheap to track; certify only improvements
            if let Ok((mu, _)) = problem.off_target_spectrum(alpha) {
                let h = problem.target_weight.dot(alpha) - mu[0];
                if h > best_surrogate {
                    best_surrogate = h;
                    candidates.push(alpha.clone());
                }
            }
            last = Some(alpha.clone());
        })?;
        if let Some(l) = last {
            candidates.push(l);
        }
        for alpha in candidates.iter().rev().take(4) {
            for a in [problem.polish(alpha), alpha.clone()] {
                if let Some(x) = alpha_to_x(&problem, &a) {
                    if let Ok(sol) = certify(catalog, v, &x) {
                        consider(sol);
                    }
                }
            }
        }
    }
    best.ok_or(Error::NoDominantFeasible)
}

/// Restricts the catalog to a greedy self-aligned subset, maximizes the
/// eigengap there and maps the weights back to the full catalog.
pub fn design_self_aligned(
    catalog: &ItemCatalog,
    v: &UnitVector,
    threshold: f64,
    options: &EigengapOptions,
) -> Result<DesignSolution> {
    let subset = select_self_aligned_subset(catalog, v, threshold)?;
    let restricted = catalog.subset(&subset)?;
    let sol = maximize_eigengap(&restricted, v, options)?;
    let mut x = vec![0.0; catalog.len()];
    for (k, &i) in subset.iter().enumerate() {
        x[i] = sol.x[k];
    }
    certify(catalog, v, &x)
}
