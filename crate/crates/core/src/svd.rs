//! Thin singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! The taller orientation of the input is orthogonalized column by column
//! until every pair of columns is orthogonal relative to its norms. Column
//! norms are then the singular values, the accumulated rotations form `V`,
//! and the normalized columns form `U`. One-sided Jacobi computes small
//! singular values to high relative accuracy, which matters here because
//! thresholding decisions are made directly on them.

use crate::error::{invalid, ElmaError, Result};
use crate::matrix::Matrix;

/// Maximum number of Jacobi sweeps before reporting non-convergence.
pub const MAX_SWEEPS: usize = 80;

/// Singular values below this fraction of the largest one are set to zero.
pub const CLAMP_RELATIVE: f64 = 1e-12;

/// `Y = U · diag(sigma) · Vᵀ` with `U` m×k, `V` n×k and `k = min(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdFactors {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl SvdFactors {
    /// Assembles factors, checking shapes, ordering and orthonormality
    /// (1e-8 entrywise).
    pub fn new(u: Matrix, sigma: Vec<f64>, v: Matrix) -> Result<Self> {
        let k = sigma.len();
        if u.cols() != k || v.cols() != k || k != u.rows().min(v.rows()) {
            return invalid(format!(
                "inconsistent factor shapes: u {:?}, {} singular values, v {:?}",
                u.shape(),
                k,
                v.shape()
            ));
        }
        if sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return invalid("singular values must be finite and nonnegative");
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return invalid("singular values must be sorted non-increasing");
        }
        for (name, q) in [("u", &u), ("v", &v)] {
            if orthonormality_error(q) > 1e-8 {
                return invalid(format!("{name} does not have orthonormal columns"));
            }
        }
        Ok(Self { u, sigma, v })
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// `U · diag(sigma) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(&self.sigma)
    }

    /// `U · diag(values) · Vᵀ` for replacement singular values, e.g. the
    /// output of a threshold rule. Panics if `values.len() != k`.
    pub fn reconstruct_with(&self, values: &[f64]) -> Matrix {
        assert_eq!(values.len(), self.sigma.len(), "wrong number of singular values");
        let (m, n) = (self.u.rows(), self.v.rows());
        let active: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
        // Compress to the active rank so zero singular values cost nothing.
        let r = active.len();
        let mut us = vec![0.0; m * r];
        for i in 0..m {
            for (slot, &k) in active.iter().enumerate() {
                us[i * r + slot] = self.u.get(i, k) * values[k];
            }
        }
        let mut vs = vec![0.0; n * r];
        for j in 0..n {
            for (slot, &k) in active.iter().enumerate() {
                vs[j * r + slot] = self.v.get(j, k);
            }
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let urow = &us[i * r..(i + 1) * r];
            for j in 0..n {
                let vrow = &vs[j * r..(j + 1) * r];
                out[i * n + j] = urow.iter().zip(vrow).map(|(a, b)| a * b).sum();
            }
        }
        Matrix::from_raw(m, n, out)
    }
}

/// Largest entrywise deviation of `QᵀQ` from the identity.
pub fn orthonormality_error(q: &Matrix) -> f64 {
    let qt = q.transpose();
    let k = q.cols();
    let mut worst: f64 = 0.0;
    for a in 0..k {
        for b in a..k {
            let dot: f64 = qt.row(a).iter().zip(qt.row(b)).map(|(x, y)| x * y).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Thin SVD of `y`.
pub fn svd(y: &Matrix) -> Result<SvdFactors> {
    let (m, n) = y.shape();
    if m >= n {
        let (u, sigma, v) = jacobi_tall(y)?;
        Ok(SvdFactors { u, sigma, v })
    } else {
        let (u, sigma, v) = jacobi_tall(&y.transpose())?;
        Ok(SvdFactors { u: v, sigma, v: u })
    }
}

/// `U · diag(σ) · Vᵀ` for any valid factor triple.
pub fn reconstruct(f: &SvdFactors) -> Matrix {
    f.reconstruct()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xi, yi) = (*x, *y);
        *x = c * xi - s * yi;
        *y = s * xi + c * yi;
    }
}

fn pair_mut(buf: &mut [f64], len: usize, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let (lo, hi) = buf.split_at_mut(j * len);
    (&mut lo[i * len..(i + 1) * len], &mut hi[..len])
}

/// Requires `rows >= cols`.
fn jacobi_tall(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    // Column-contiguous working copies of A and V.
    let mut cols = a.transpose().into_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let tol = m as f64 * f64::EPSILON;

    let mut converged = n < 2;
    let mut sweeps = 0;
    let mut worst = 0.0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(ElmaError::SvdNoConvergence {
                sweeps,
                off_diagonal: worst,
            });
        }
        sweeps += 1;
        worst = 0.0f64;
        let mut rotated = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (ci, cj) = pair_mut(&mut cols, m, i, j);
                let alpha = dot(ci, ci);
                let beta = dot(cj, cj);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(ci, cj);
                let rel = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                worst = worst.max(rel);
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(ci, cj, c, s);
                let (vi, vj) = pair_mut(&mut v, n, i, j);
                rotate(vi, vj, c, s);
            }
        }
        converged = !rotated;
    }

    let norms: Vec<f64> = (0..n).map(|j| dot(&cols[j * m..(j + 1) * m], &cols[j * m..(j + 1) * m]).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal values keep their column order.
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let top = order.first().map_or(0.0, |&j| norms[j]);

    let mut sigma = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v_out = vec![0.0; n * n];
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        for r in 0..n {
            v_out[r * n + slot] = v[j * n + r];
        }
        if s > CLAMP_RELATIVE * top && s > 0.0 {
            sigma.push(s);
            u_cols.push(cols[j * m..(j + 1) * m].iter().map(|x| x / s).collect());
        } else {
            sigma.push(0.0);
            u_cols.push(Vec::new());
            pending.push(slot);
        }
    }
    complete_basis(&mut u_cols, &pending, m);

    let mut u = vec![0.0; m * n];
    for (slot, col) in u_cols.iter().enumerate() {
        for r in 0..m {
            u[r * n + slot] = col[r];
        }
    }
    Ok((Matrix::from_raw(m, n, u), sigma, Matrix::from_raw(n, n, v_out)))
}

/// Fills the `pending` slots with unit vectors orthogonal to every other
/// column, drawing candidates from the standard basis. The residuals of all
/// `m` candidates square-sum to the number of free dimensions, so the best
/// one always has norm at least `sqrt(free / m)`.
fn complete_basis(cols: &mut [Vec<f64>], pending: &[usize], m: usize) {
    for &slot in pending {
        let mut best: (f64, Vec<f64>) = (0.0, Vec::new());
        for candidate in 0..m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            // Two rounds of Gram-Schmidt.
            for _ in 0..2 {
                for (k, other) in cols.iter().enumerate() {
                    if k == slot || other.is_empty() {
                        continue;
                    }
                    let proj = dot(&e, other);
                    for (x, o) in e.iter_mut().zip(other) {
                        *x -= proj * o;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > best.0 {
                best = (norm, e);
            }
            if norm > 0.5 {
                break;
            }
        }
        assert!(best.0 > 0.0, "no direction left while completing U");
        let norm = best.0;
        cols[slot] = best.1.into_iter().map(|x| x / norm).collect();
    }
}
