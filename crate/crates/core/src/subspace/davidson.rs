//! Single-vector Davidson iteration with a diagonal preconditioner.

use nalgebra::{DMatrix, SymmetricEigen};

use super::SparseSymMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart_dim: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000, restart_dim: 20 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `t` against the columns in `basis` (two passes) and
/// normalizes; `None` when nothing new survives.
fn orthonormalize(t: &mut [f64], basis: &[Vec<f64>]) -> Option<()> {
    let start = norm(t);
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, t);
            axpy(-c, v, t);
        }
    }
    let n = norm(t);
    if n <= 1e-10 * start.max(1e-300) || n == 0.0 {
        return None;
    }
    t.iter_mut().for_each(|x| *x /= n);
    Some(())
}

/// Lowest eigenpair of `h`. Returns `(energy, vector, residual norm)`.
pub fn lowest_eigenpair(h: &SparseSymMatrix, opts: &DavidsonOptions) -> Result<(f64, Vec<f64>, f64)> {
    let n = h.dim();
    let diag = h.diagonal();
    let start = diag.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);

    let mut v0 = vec![0.0; n];
    v0[start] = 1.0;
    let mut basis = vec![v0];
    let mut images = vec![h.matvec(&basis[0])];
    let mut best = f64::INFINITY;
    let restart = opts.restart_dim.max(2);

    for iter in 0..opts.max_iter {
        let k = basis.len();
        let proj = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &images[j]));
        let eig = SymmetricEigen::new(proj);
        let (imin, theta) = eig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let s = eig.eigenvectors.column(imin);

        let mut x = vec![0.0; n];
        let mut hx = vec![0.0; n];
        for j in 0..k {
            axpy(s[j], &basis[j], &mut x);
            axpy(s[j], &images[j], &mut hx);
        }
        let mut r = hx.clone();
        axpy(-theta, &x, &mut r);
        let rnorm = norm(&r);
        best = best.min(rnorm);
        if rnorm <= opts.tol * theta.abs().max(1.0) {
            log::debug!("davidson converged in {iter} iterations, residual {rnorm:.3e}");
            return Ok((theta, x, rnorm));
        }

        let mut t: Vec<f64> = r
            .iter()
            .zip(&diag)
            .map(|(ri, di)| {
                let denom = theta - di;
                if denom.abs() < 1e-8 {
                    ri / 1e-8f64.copysign(denom)
                } else {
                    ri / denom
                }
            })
            .collect();

        if k >= restart {
            let xn = norm(&x);
            x.iter_mut().for_each(|v| *v /= xn);
            hx.iter_mut().for_each(|v| *v /= xn);
            basis = vec![x];
            images = vec![hx];
        }
        if orthonormalize(&mut t, &basis).is_none() {
            // the preconditioned residual lies in the span; fall back to the raw residual
            t = r;
            if orthonormalize(&mut t, &basis).is_none() {
                return Err(Error::Convergence { iterations: iter + 1, residual: best });
            }
        }
        images.push(h.matvec(&t));
        basis.push(t);
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual: best })
}
