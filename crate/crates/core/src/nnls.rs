//! Lawson-Hanson active-set solver for `min ||A x - b||` subject to `x >= 0`.
//!
//! Entering variables are chosen by largest dual value with ties going to the
//! lowest index. Each passive-set subproblem is solved for its minimum-norm
//! least-squares solution, so rank-deficient passive sets stay well defined.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `||A x - b||`.
    pub residual: f64,
    pub iterations: usize,
}

/// Minimum-norm least-squares solution of `A_P z = b` over the columns in
/// `passive`, scattered back to length `n`.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let n = a.ncols();
    let mut z = DVector::zeros(n);
    if passive.is_empty() {
        return z;
    }
    let sub = a.select_columns(passive.iter());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-12 * (a.nrows().max(passive.len()) as f64);
    if let Ok(sol) = svd.solve(b, eps) {
        for (k, &j) in passive.iter().enumerate() {
            z[j] = sol[k];
        }
    }
    z
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let (m, n) = a.shape();
    assert_eq!(m, b.len(), "nnls: A has {m} rows but b has {} entries", b.len());

    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = 10.0 * f64::EPSILON * scale * scale * (m.max(n) as f64);

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    // columns whose entry made no progress; cleared whenever x moves
    let mut blocked = vec![false; n];
    let mut iterations = 0;
    let max_iter = 3 * n.max(1) + 30;

    while iterations < max_iter {
        let w = a.transpose() * (b - a * &x);
        let mut enter: Option<usize> = None;
        for j in 0..n {
            if passive[j] || blocked[j] || w[j] <= tol {
                continue;
            }
            match enter {
                Some(k) if w[j] <= w[k] => {}
                _ => enter = Some(j),
            }
        }
        let Some(j) = enter else { break };
        iterations += 1;
        passive[j] = true;

        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = passive_solve(a, b, &idx);
            if first && z[j] <= 0.0 {
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            first = false;
            if idx.iter().all(|&i| z[i] > 0.0) {
                x = z;
                blocked.iter_mut().for_each(|f| *f = false);
                break;
            }
            let mut step = 1.0_f64;
            for &i in &idx {
                if z[i] <= 0.0 {
                    let denom = x[i] - z[i];
                    if denom > 0.0 {
                        step = step.min(x[i] / denom);
                    }
                }
            }
            for &i in &idx {
                x[i] += step * (z[i] - x[i]);
                if x[i] <= tol {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            blocked.iter_mut().for_each(|f| *f = false);
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    let residual = (a * &x - b).norm();
    NnlsSolution {
        x,
        residual,
        iterations,
    }
}
