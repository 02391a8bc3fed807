//! Unit-sphere vectors, item catalogs, step-size schedules and a small dense
//! symmetric eigensolver.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Vectors with norm at or below this are treated as zero.
pub const ZERO_NORM_TOL: f64 = 1e-12;

/// Entrywise asymmetry tolerated by [`symmetric_eig`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A point on the unit sphere `S^{d-1}`, `d >= 2`.
#[derive(Clone, PartialEq)]
pub struct UnitVector(DVector<f64>);

impl UnitVector {
    /// Normalizes `v`. Fails on vectors shorter than [`ZERO_NORM_TOL`] or of
    /// dimension below 2.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::DimensionTooSmall(v.len()));
        }
        let norm = v.norm();
        if !(norm > ZERO_NORM_TOL) {
            return Err(Error::ZeroVector { norm });
        }
        Ok(UnitVector(v / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// Accepts `coords` only if its norm is already within `tol` of one, then
    /// renormalizes.
    pub fn from_near_unit(coords: &[f64], tol: f64) -> Result<Self> {
        let v = DVector::from_column_slice(coords);
        let norm = v.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "vector norm {norm} deviates from 1 by more than {tol:e}"
            )));
        }
        Self::new(v)
    }

    /// Standard basis vector `e_i` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, len: d });
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector(-&self.0)
    }

    pub fn distance(&self, other: &UnitVector) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Angle in radians, clamped against rounding outside `[-1, 1]`.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("UnitVector").field(&self.0.as_slice()).finish()
    }
}

impl Index<usize> for UnitVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `v / ||v||`.
pub fn normalize(v: &DVector<f64>) -> Result<UnitVector> {
    UnitVector::new(v.clone())
}

/// An ordered, fixed set of unit-norm items sharing one dimension. Index `i`
/// identifies item `q_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemCatalog {
    items: Vec<UnitVector>,
    matrix: DMatrix<f64>,
}

impl ItemCatalog {
    pub fn new(items: Vec<UnitVector>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyCatalog)?;
        let d = first.dim();
        for item in &items {
            item.check_dim(d)?;
        }
        let matrix = DMatrix::from_fn(d, items.len(), |r, c| items[c][r]);
        Ok(ItemCatalog { items, matrix })
    }

    /// Normalizes each row of `rows` into an item.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let items = rows
            .iter()
            .map(|r| UnitVector::from_slice(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }

    /// The catalog made of the standard basis `e_1, .., e_d`.
    pub fn standard_basis(d: usize) -> Result<Self> {
        Self::new((0..d).map(|i| UnitVector::basis(d, i)).collect::<Result<_>>()?)
    }

    /// `n` items drawn uniformly from the sphere.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Self> {
        let items = (0..n)
            .map(|_| sample_unit_sphere(d, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn items(&self) -> &[UnitVector] {
        &self.items
    }

    pub fn get(&self, index: usize) -> Result<&UnitVector> {
        self.items.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.items.len(),
        })
    }

    /// The `d x N` matrix `Q` whose columns are the items.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `Q diag(w) Q^T`.
    pub fn weighted_outer(&self, weights: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (q, &w) in self.items.iter().zip(weights) {
            if w != 0.0 {
                out.ger(w, q.as_vector(), q.as_vector(), 1.0);
            }
        }
        out
    }

    /// Subset of the catalog in the order given by `indices`.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let items = indices
            .iter()
            .map(|&i| self.get(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }
}

/// Step sizes `eta_t`: either constant or `eta / (t + s)` with integer
/// `eta`, `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeSchedule {
    Constant { eta: f64 },
    Decreasing { eta: u32, s: u64 },
}

impl StepSizeSchedule {
    pub fn constant(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "constant step must be positive and finite, got {eta}"
            )));
        }
        Ok(StepSizeSchedule::Constant { eta })
    }

    pub fn decreasing(eta: u32, s: u64) -> Result<Self> {
        if eta < 1 || s < 1 {
            return Err(Error::InvalidSchedule(format!(
                "decreasing schedule needs eta >= 1 and s >= 1, got eta={eta}, s={s}"
            )));
        }
        Ok(StepSizeSchedule::Decreasing { eta, s })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSizeSchedule::Constant { eta } => Self::constant(eta).map(|_| ()),
            StepSizeSchedule::Decreasing { eta, s } => Self::decreasing(eta, s).map(|_| ()),
        }
    }

    pub fn eta_at(&self, t: usize) -> f64 {
        match *self {
            StepSizeSchedule::Constant { eta } => eta,
            StepSizeSchedule::Decreasing { eta, s } => eta as f64 / (t as f64 + s as f64),
        }
    }
}

/// Eigenvalues sorted descending with paired orthonormal eigenvectors
/// (column `i` of `eigenvectors` belongs to `eigenvalues[i]`).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigResult {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymmetricEigResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `lambda_1 - lambda_2`, or zero for 1x1 input.
    pub fn eigengap(&self) -> f64 {
        if self.dim() < 2 {
            0.0
        } else {
            self.eigenvalues[0] - self.eigenvalues[1]
        }
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&self.eigenvalues) * v.transpose()
    }
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// Each eigenvector is signed so that its largest-magnitude coordinate is
/// positive (ties go to the lowest index), which makes the output a pure
/// function of the input.
pub fn symmetric_eig(a: &DMatrix<f64>) -> Result<SymmetricEigResult> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let max_asym = max_asymmetry(a);
    if max_asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { max_asym });
    }
    let sym = (a + a.transpose()) * 0.5;
    let n = sym.nrows();
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let mut lead = 0;
        for k in 1..n {
            if col[k].abs() > col[lead].abs() {
                lead = k;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SymmetricEigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Uniform direction on `S^{d-1}`: a normalized vector of independent
/// standard normals.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > ZERO_NORM_TOL {
            return UnitVector::new(v);
        }
    }
}
