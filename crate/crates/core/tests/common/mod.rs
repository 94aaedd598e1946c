//! Independent oracles shared by the integration tests. None of these call
//! into the solver paths they are used to check.

#![allow(dead_code)]

use elma::image::GrayImage;
use elma::{Matrix, PenaltySpec, RngState};
use nalgebra::DMatrix;

/// `(y - x)² / 2 + lambda * phi(x)`.
pub fn prox_objective(spec: &PenaltySpec, y: f64, x: f64) -> f64 {
    0.5 * (y - x) * (y - x) + spec.lambda() * spec.penalty(x).unwrap()
}

fn grid_argmin(spec: &PenaltySpec, y: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let x = lo + i as f64 * step;
        let v = prox_objective(spec, y, x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Brute-force minimizer of the scalar proximal objective on `[lo, hi]` at
/// resolution `1e-5`. A `1e-3` scan over the whole interval is refined by
/// a `1e-5` scan of the surrounding two coarse cells; for a convex objective
/// the true minimizer always lies in that bracket.
pub fn prox_grid_oracle(spec: &PenaltySpec, y: f64, lo: f64, hi: f64) -> f64 {
    let coarse = 1e-3;
    let x0 = grid_argmin(spec, y, lo, hi, coarse);
    let a = (x0 - coarse).max(lo);
    let b = (x0 + coarse).min(hi);
    grid_argmin(spec, y, a, b, 1e-5)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    let mut data = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            data.push(m[(r, c)]);
        }
    }
    Matrix::new(m.nrows(), m.ncols(), data).unwrap()
}

/// Eigenvalues of `YᵀY`, descending, from a symmetric tridiagonal QR
/// eigensolver.
pub fn gram_eigenvalues(y: &Matrix) -> Vec<f64> {
    let a = to_na(y);
    let gram = a.transpose() * &a;
    let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut RngState) -> Matrix {
    elma::random_gaussian(rows, cols, rng).unwrap()
}

/// Haar-ish random orthogonal matrix from the QR factorization of a
/// Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut RngState) -> Matrix {
    let g = to_na(&gaussian(n, n, rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix column signs so the distribution does not depend on the QR convention.
    let mut q = q.clone();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    from_na(&q)
}

/// Diagonal (rectangular) matrix with the given singular values sandwiched
/// between random orthogonal factors.
pub fn with_spectrum(m: usize, n: usize, sigma: &[f64], rng: &mut RngState) -> Matrix {
    let q1 = random_orthogonal(m, rng);
    let q2 = random_orthogonal(n, rng);
    let d = Matrix::from_diag_rect(m, n, sigma).unwrap();
    q1.matmul(&d).unwrap().matmul(&q2.transpose()).unwrap()
}

pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1.0)
}

/// Piecewise-smooth test image built from a handful of separable terms
/// plus flat blocks, so its patch groups are close to low rank.
pub fn structured_image(width: usize, height: usize) -> GrayImage {
    let mut px = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (y, x) = (r as f64, c as f64);
            let mut v = 110.0
                + 50.0 * (2.0 * std::f64::consts::PI * y / 32.0).sin() * (2.0 * std::f64::consts::PI * x / 48.0).cos();
            if (r / 24 + c / 24) % 3 == 0 {
                v += 60.0;
            }
            if x + y < (width as f64) * 0.6 {
                v -= 40.0;
            }
            px.push(v.clamp(0.0, 255.0));
        }
    }
    GrayImage::new(width, height, px).unwrap()
}
