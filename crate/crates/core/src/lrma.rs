//! Closed-form low-rank matrix approximation.
//!
//! Every solver here minimizes (or, for the baselines, mimics the
//! minimizer of)
//!
//! ```text
//! Psi(X) = ||Y - X||_F² / 2 + lambda * sum_i phi(sigma_i(X); a)
//! ```
//!
//! by thresholding the singular values of `Y` and keeping its singular
//! vectors. With the partly quadratic penalty and `0 <= a < 1/lambda` the
//! objective is strictly convex and the thresholded SVD is its unique global
//! minimizer.

use std::fmt;
use std::str::FromStr;

use crate::error::{ElmaError, Result};
use crate::matrix::Matrix;
use crate::penalty::{PenaltySpec, DEFAULT_WEIGHT_EPS};
use crate::svd::{svd, SvdFactors};

/// Solver selection used by the experiment harnesses and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Firm thresholding of singular values (partly quadratic penalty).
    Elma,
    /// Soft thresholding of singular values (nuclear norm, SVT).
    Nnm,
    /// p-shrinkage of singular values.
    Ps,
    /// One-shot weighted soft thresholding.
    Wnnm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Elma, Method::Nnm, Method::Ps, Method::Wnnm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Elma => "elma",
            Method::Nnm => "nnm",
            Method::Ps => "ps",
            Method::Wnnm => "wnnm",
        }
    }

    /// Penalty for this method at regularization `lambda`. `a_fraction` is
    /// used by ELMA only (`a = a_fraction / lambda`), `p` by PS only.
    pub fn spec(self, lambda: f64, a_fraction: f64, p: f64) -> Result<PenaltySpec> {
        match self {
            Method::Elma => PenaltySpec::firm(lambda, a_fraction),
            Method::Nnm => PenaltySpec::soft(lambda),
            Method::Ps => PenaltySpec::p_shrinkage(lambda, p),
            Method::Wnnm => PenaltySpec::weighted_soft(lambda, DEFAULT_WEIGHT_EPS),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ElmaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "elma" | "firm" | "partly-quadratic" => Ok(Method::Elma),
            "nnm" | "svt" | "soft" => Ok(Method::Nnm),
            "ps" | "p-shrinkage" => Ok(Method::Ps),
            "wnnm" | "weighted" | "weighted-soft" => Ok(Method::Wnnm),
            other => Err(ElmaError::InvalidParameter(format!(
                "unknown method {other:?} (expected elma, nnm/svt, ps or wnnm)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrmaResult {
    pub x_hat: Matrix,
    /// Singular values of the input.
    pub sigma_in: Vec<f64>,
    /// Thresholded singular values, i.e. the spectrum of `x_hat`.
    pub sigma_out: Vec<f64>,
    /// `||Y - x_hat||_F² / 2`, computed spectrally.
    pub data_term: f64,
    /// `lambda * sum phi(sigma_out)`; `None` for families without a penalty
    /// expression.
    pub penalty_term: Option<f64>,
}

impl LrmaResult {
    /// Objective at `x_hat`; the data term alone when the penalty is undefined.
    pub fn objective(&self) -> f64 {
        self.data_term + self.penalty_term.unwrap_or(0.0)
    }
}

/// `||Y - X||_F² / 2 + lambda * sum phi(sigma_i(X); a)`.
pub fn objective_eval(y: &Matrix, x: &Matrix, spec: &PenaltySpec) -> Result<f64> {
    if y.shape() != x.shape() {
        return Err(ElmaError::ShapeMismatch {
            expected: y.shape(),
            actual: x.shape(),
        });
    }
    // Fail on unsupported families before paying for an SVD.
    spec.penalty(0.0)?;
    let data = 0.5 * y.sub(x)?.frobenius_norm_sq();
    let f = svd(x)?;
    let mut pen = 0.0;
    for &s in f.sigma() {
        pen += spec.penalty(s)?;
    }
    Ok(data + spec.lambda() * pen)
}

/// `U · Theta(Sigma) · Vᵀ` for `Y = U Sigma Vᵀ`.
pub fn solve(y: &Matrix, spec: &PenaltySpec) -> Result<LrmaResult> {
    let f = svd(y)?;
    Ok(solve_with_factors(&f, spec))
}

/// Same as [`solve`] on precomputed factors of `Y`.
pub fn solve_with_factors(f: &SvdFactors, spec: &PenaltySpec) -> LrmaResult {
    let sigma_in = f.sigma().to_vec();
    let sigma_out = spec.apply_to_sigma(&sigma_in);
    let x_hat = f.reconstruct_with(&sigma_out);
    let data_term = 0.5
        * sigma_in
            .iter()
            .zip(&sigma_out)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    let penalty_term = spec.has_penalty().then(|| {
        spec.lambda()
            * sigma_out
                .iter()
                .map(|&s| spec.penalty(s).expect("family has a penalty"))
                .sum::<f64>()
    });
    LrmaResult {
        x_hat,
        sigma_in,
        sigma_out,
        data_term,
        penalty_term,
    }
}

/// Number of thresholded singular values above `tol`.
pub fn rank_of(result: &LrmaResult, tol: f64) -> usize {
    result.sigma_out.iter().filter(|&&s| s > tol).count()
}
