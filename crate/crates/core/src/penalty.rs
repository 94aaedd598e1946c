//! Sparsity-inducing penalties on singular values and their threshold
//! (proximal) operators.
//!
//! The partly quadratic penalty
//!
//! ```text
//! phi(x; a) = |x| - a x² / 2   for |x| <= 1/a
//!           = 1 / (2a)         for |x| >= 1/a
//! ```
//!
//! is non-convex for `a > 0`, yet `x²/2 + lambda * phi(x; a)` stays strictly
//! convex as long as `0 <= a < 1/lambda`. Its proximal operator is the firm
//! threshold: zero below `lambda`, identity above `1/a`, linear in between.
//! `PenaltySpec` refuses to construct a partly quadratic penalty outside that
//! range, so every solver downstream works with a strictly convex objective.
//!
//! The other families are baselines: soft thresholding (nuclear norm),
//! p-shrinkage and a one-shot weighted soft threshold.

use std::fmt::Write as _;

use crate::error::{invalid, ElmaError, Result};

/// Default offset in the weighted soft threshold weights `c / (sigma + eps)`.
pub const DEFAULT_WEIGHT_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PenaltyFamily {
    PartlyQuadratic,
    SoftL1,
    PShrinkage,
    WeightedSoft,
}

/// A validated penalty family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltySpec {
    family: PenaltyFamily,
    lambda: f64,
    a: f64,
    p: f64,
    weight_eps: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        invalid(format!("lambda must be finite and > 0, got {lambda}"))
    }
}

/// Exclusive upper bound `1/lambda` on the non-convexity parameter `a`.
pub fn convexity_max_a(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 / lambda)
}

impl PenaltySpec {
    /// Partly quadratic penalty; requires `0 <= a < 1/lambda`.
    pub fn partly_quadratic(lambda: f64, a: f64) -> Result<Self> {
        let max_a = convexity_max_a(lambda)?;
        if !(a >= 0.0 && a < max_a) {
            return invalid(format!(
                "non-convexity parameter a = {a} outside [0, 1/lambda) = [0, {max_a})"
            ));
        }
        Ok(Self {
            family: PenaltyFamily::PartlyQuadratic,
            lambda,
            a,
            p: 1.0,
            weight_eps: DEFAULT_WEIGHT_EPS,
        })
    }

    /// Partly quadratic penalty with `a = fraction / lambda`, `fraction` in `[0, 1)`.
    pub fn firm(lambda: f64, a_fraction: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(0.0..1.0).contains(&a_fraction) {
            return invalid(format!("a_fraction must lie in [0, 1), got {a_fraction}"));
        }
        Self::partly_quadratic(lambda, a_fraction / lambda)
    }

    /// `|x|`, whose proximal operator is soft thresholding.
    pub fn soft(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            family: PenaltyFamily::SoftL1,
            lambda,
            a: 0.0,
            p: 1.0,
            weight_eps: DEFAULT_WEIGHT_EPS,
        })
    }

    /// p-shrinkage with `p <= 1` (`p = 1` is soft thresholding).
    pub fn p_shrinkage(lambda: f64, p: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(p <= 1.0) || !p.is_finite() {
            return invalid(format!("p-shrinkage requires finite p <= 1, got {p}"));
        }
        Ok(Self {
            family: PenaltyFamily::PShrinkage,
            lambda,
            a: 0.0,
            p,
            weight_eps: DEFAULT_WEIGHT_EPS,
        })
    }

    /// Soft threshold with per-singular-value weights inversely proportional
    /// to the singular values; the largest weight equals `lambda`.
    pub fn weighted_soft(lambda: f64, weight_eps: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(weight_eps > 0.0) || !weight_eps.is_finite() {
            return invalid(format!("weight_eps must be finite and > 0, got {weight_eps}"));
        }
        Ok(Self {
            family: PenaltyFamily::WeightedSoft,
            lambda,
            a: 0.0,
            p: 1.0,
            weight_eps,
        })
    }

    pub fn family(&self) -> PenaltyFamily {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Non-convexity parameter; zero for every family but partly quadratic.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight_eps(&self) -> f64 {
        self.weight_eps
    }

    /// Whether the family has a closed penalty expression.
    pub fn has_penalty(&self) -> bool {
        matches!(self.family, PenaltyFamily::PartlyQuadratic | PenaltyFamily::SoftL1)
    }

    fn require_penalty(&self) -> Result<()> {
        if self.has_penalty() {
            Ok(())
        } else {
            Err(ElmaError::Unsupported(format!(
                "{:?} has no closed-form penalty",
                self.family
            )))
        }
    }

    /// `phi(x; a)`.
    pub fn penalty(&self, x: f64) -> Result<f64> {
        self.require_penalty()?;
        let ax = x.abs();
        let a = self.a;
        Ok(if a == 0.0 {
            ax
        } else if ax <= 1.0 / a {
            ax - 0.5 * a * x * x
        } else {
            0.5 / a
        })
    }

    /// `s(x; a) = phi(x; a) - |x|`, concave with curvature in `[-a, 0]`.
    pub fn s(&self, x: f64) -> Result<f64> {
        Ok(self.penalty(x)? - x.abs())
    }

    /// Scalar threshold operator. For the weighted family this applies the
    /// largest weight, `lambda`; use [`PenaltySpec::apply_to_sigma`] for
    /// the per-index weights.
    pub fn threshold(&self, y: f64) -> f64 {
        let ay = y.abs();
        let lambda = self.lambda;
        let mag = match self.family {
            PenaltyFamily::PartlyQuadratic => {
                let ramp = ((ay - lambda) / (1.0 - self.a * lambda)).max(0.0);
                ay.min(ramp)
            }
            PenaltyFamily::SoftL1 | PenaltyFamily::WeightedSoft => (ay - lambda).max(0.0),
            PenaltyFamily::PShrinkage => {
                if ay == 0.0 {
                    0.0
                } else {
                    // lambda^(2-p) |y|^(p-1) written to avoid overflow for p < 1
                    (ay - lambda * (lambda / ay).powf(1.0 - self.p)).max(0.0)
                }
            }
        };
        if mag == 0.0 {
            0.0
        } else {
            mag.copysign(y)
        }
    }

    /// Thresholds a non-increasing vector of singular values.
    pub fn apply_to_sigma(&self, sigma: &[f64]) -> Vec<f64> {
        match self.family {
            PenaltyFamily::WeightedSoft => {
                let eps = self.weight_eps;
                let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
                let c = self.lambda * (smallest + eps);
                sigma.iter().map(|&s| (s - c / (s + eps)).max(0.0)).collect()
            }
            _ => sigma.iter().map(|&s| self.threshold(s)).collect(),
        }
    }

    /// Weights used by the weighted soft threshold for `sigma`.
    pub fn weights(&self, sigma: &[f64]) -> Vec<f64> {
        let eps = self.weight_eps;
        let smallest = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        let c = self.lambda * (smallest + eps);
        sigma.iter().map(|&s| c / (s + eps)).collect()
    }
}

/// One sample of the penalty, s-function and threshold curves. Columns a
/// family does not define are `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    pub phi: Option<f64>,
    pub s: Option<f64>,
    pub theta: f64,
}

/// Samples `x = lo + i * step` for every `x <= hi` (with a small tolerance
/// so that `hi` itself is included when the range divides evenly).
pub fn emit_curves(spec: &PenaltySpec, lo: f64, hi: f64, step: f64) -> Result<Vec<CurveRow>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return invalid(format!("curve range requires lo < hi, got [{lo}, {hi}]"));
    }
    if !(step > 0.0) || !step.is_finite() {
        return invalid(format!("curve step must be > 0, got {step}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let x = lo + i as f64 * step;
            CurveRow {
                x,
                phi: spec.penalty(x).ok(),
                s: spec.s(x).ok(),
                theta: spec.threshold(x),
            }
        })
        .collect())
}

/// CSV with header `x,phi,s,theta`; undefined columns are empty fields.
pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("x,phi,s,theta\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        writeln!(out, "{},{},{},{}", r.x, opt(r.phi), opt(r.s), r.theta).unwrap();
    }
    out
}
