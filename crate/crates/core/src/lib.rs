//! Low-rank matrix denoising by thresholding singular values with a
//! non-convex penalty whose objective stays strictly convex.
//!
//! The main entry points are [`lrma::solve`], which returns the global
//! minimizer of `||Y - X||_F² / 2 + lambda * sum phi(sigma_i(X); a)` for the
//! partly quadratic penalty, and the two experiment harnesses in [`bench`]
//! (synthetic relative-error sweep) and [`image`] (patch-group image
//! denoising).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod image;
pub mod lrma;
pub mod matrix;
pub mod penalty;
pub mod svd;

pub use error::{ElmaError, Result};
pub use lrma::{objective_eval, rank_of, solve, solve_with_factors, LrmaResult, Method};
pub use matrix::{add_awgn, random_gaussian, Matrix, RngState};
pub use penalty::{convexity_max_a, emit_curves, PenaltyFamily, PenaltySpec};
pub use svd::{reconstruct, svd, SvdFactors};
