//! Synthetic low-rank benchmark: random rank-k ground truth, additive
//! Gaussian noise, and a relative-error sweep over noise levels for each
//! solver.
//!
//! Every (noise level, trial) cell draws its ground truth and noise from its
//! own ChaCha stream, so results do not depend on scheduling or thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{invalid, ElmaError, Result};
use crate::lrma::{solve_with_factors, Method};
use crate::matrix::{add_awgn, random_gaussian, Matrix, RngState};
use crate::svd::svd;

/// Stream ids at or above this value are reserved for beta tuning.
const TUNING_STREAM_BASE: u64 = 1 << 63;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub sigma_list: Vec<f64>,
    pub trials: usize,
    /// Methods to run and their `beta` in `lambda = beta * sigma`.
    pub betas: BTreeMap<Method, f64>,
    /// ELMA uses `a = a_fraction / lambda`.
    pub a_fraction: f64,
    /// p-shrinkage exponent.
    pub p: f64,
    pub seed: u64,
    /// Record wall-clock time per solve. Off by default so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            m: 200,
            n: 200,
            rank: 100,
            sigma_list: (1..=10).map(f64::from).collect(),
            trials: 15,
            betas: BTreeMap::new(),
            a_fraction: 0.6,
            p: -2.0,
            seed: 0,
            timing: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return invalid("matrix dimensions must be positive");
        }
        if self.rank == 0 || self.rank > self.m.min(self.n) {
            return invalid(format!(
                "rank {} must lie in [1, min(m, n)] = [1, {}]",
                self.rank,
                self.m.min(self.n)
            ));
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        if self.sigma_list.is_empty() {
            return invalid("sigma list is empty");
        }
        if let Some(s) = self.sigma_list.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return invalid(format!("noise levels must be positive, got {s}"));
        }
        if self.betas.is_empty() {
            return invalid("no methods selected");
        }
        if let Some((m, b)) = self.betas.iter().find(|(_, b)| !(**b > 0.0 && b.is_finite())) {
            return invalid(format!("beta for {m} must be positive, got {b}"));
        }
        if !(self.a_fraction >= 0.0 && self.a_fraction < 1.0) {
            return invalid(format!("a_fraction must lie in [0, 1), got {}", self.a_fraction));
        }
        if !(self.p <= 1.0) {
            return invalid(format!("p must be <= 1, got {}", self.p));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub sigma: f64,
    pub trial: usize,
    pub lambda: f64,
    /// `None` when the solve failed; see `error`.
    pub rse: Option<f64>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub sigma: f64,
    pub mean_rse: f64,
    pub std_rse: f64,
    pub count: usize,
}

/// `M = A B` with standard normal `A` (m×k) and `B` (k×n).
pub fn generate_low_rank(m: usize, n: usize, k: usize, rng: &mut RngState) -> Result<Matrix> {
    if k == 0 || k > m.min(n) {
        return invalid(format!("rank {k} must lie in [1, min(m, n)]"));
    }
    let a = random_gaussian(m, k, rng)?;
    let b = random_gaussian(k, n, rng)?;
    a.matmul(&b)
}

/// `||X - M||_F / ||M||_F`.
pub fn rse(x: &Matrix, m_true: &Matrix) -> Result<f64> {
    if x.shape() != m_true.shape() {
        return Err(ElmaError::ShapeMismatch {
            expected: m_true.shape(),
            actual: x.shape(),
        });
    }
    let denom = m_true.frobenius_norm();
    if denom == 0.0 {
        return Err(ElmaError::UndefinedMetric(
            "relative error against an all-zero ground truth".into(),
        ));
    }
    Ok(x.sub(m_true)?.frobenius_norm() / denom)
}

struct Cell {
    truth: Matrix,
    noisy: Matrix,
}

fn make_cell(cfg: &BenchConfig, sigma: f64, stream: u64) -> Result<Cell> {
    let mut rng = RngState::with_stream(cfg.seed, stream);
    let truth = generate_low_rank(cfg.m, cfg.n, cfg.rank, &mut rng)?;
    let noisy = add_awgn(&truth, sigma, &mut rng)?;
    Ok(Cell { truth, noisy })
}

fn cell_stream(sigma_idx: usize, trial: usize) -> u64 {
    ((sigma_idx as u64) << 32) | trial as u64
}

fn run_cell(cfg: &BenchConfig, sigma_idx: usize, trial: usize) -> Vec<BenchRecord> {
    let sigma = cfg.sigma_list[sigma_idx];
    let failed = |method: Method, lambda: f64, e: &ElmaError| BenchRecord {
        method,
        sigma,
        trial,
        lambda,
        rse: None,
        wall_ms: 0.0,
        error: Some(e.to_string()),
    };
    let cell = match make_cell(cfg, sigma, cell_stream(sigma_idx, trial)) {
        Ok(c) => c,
        Err(e) => return cfg.betas.iter().map(|(&m, &b)| failed(m, b * sigma, &e)).collect(),
    };
    let start = Instant::now();
    let factors = svd(&cell.noisy);
    let svd_ms = start.elapsed().as_secs_f64() * 1e3;
    cfg.betas
        .iter()
        .map(|(&method, &beta)| {
            let lambda = beta * sigma;
            let factors = match &factors {
                Ok(f) => f,
                Err(e) => return failed(method, lambda, e),
            };
            let start = Instant::now();
            let outcome = method
                .spec(lambda, cfg.a_fraction, cfg.p)
                .and_then(|spec| rse(&solve_with_factors(factors, &spec).x_hat, &cell.truth));
            let wall_ms = if cfg.timing {
                svd_ms + start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            match outcome {
                Ok(r) => BenchRecord {
                    method,
                    sigma,
                    trial,
                    lambda,
                    rse: Some(r),
                    wall_ms,
                    error: None,
                },
                Err(e) => failed(method, lambda, &e),
            }
        })
        .collect()
}

/// One record per (method, sigma, trial), sorted in that order. Per-cell
/// failures are recorded and the sweep continues.
pub fn run_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = (0..cfg.sigma_list.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    #[cfg(feature = "parallel")]
    let iter = cells.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = cells.iter();
    let mut records: Vec<BenchRecord> = iter
        .map(|&(s, t)| run_cell(cfg, s, t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.sigma.total_cmp(&b.sigma))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(records)
}

/// Mean and sample standard deviation of the RSE per (method, sigma).
/// Failed records are skipped; a single observation has std 0.
pub fn summarize(records: &[BenchRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return invalid("cannot summarize an empty record set");
    }
    let mut groups: BTreeMap<(Method, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.method, r.sigma.to_bits())).or_default();
        if let Some(v) = r.rse {
            entry.push(v);
        }
    }
    Ok(groups
        .into_iter()
        .map(|((method, bits), vals)| {
            let count = vals.len();
            let (mean_rse, std_rse) = mean_std(&vals);
            SummaryRow {
                method,
                sigma: f64::from_bits(bits),
                mean_rse,
                std_rse,
                count,
            }
        })
        .collect())
}

fn mean_std(vals: &[f64]) -> (f64, f64) {
    match vals.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (vals[0], 0.0),
        n => {
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (mean, var.sqrt())
        }
    }
}

/// Coarse beta search settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TuneConfig {
    /// Candidate betas as multiples of `sqrt(max(m, n))`.
    pub multipliers: Vec<f64>,
    pub sigma: f64,
    pub trials: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            multipliers: (1..=10).map(|i| 0.5 * i as f64).collect(),
            sigma: 5.0,
            trials: 3,
        }
    }
}

/// Picks, per method, the candidate beta with the lowest mean RSE at the
/// tuning noise level. Ties go to the smaller beta. Tuning draws from
/// streams disjoint from those used by [`run_sweep`].
pub fn tune_betas(
    cfg: &BenchConfig,
    methods: &[Method],
    tune: &TuneConfig,
) -> Result<BTreeMap<Method, f64>> {
    if methods.is_empty() || tune.multipliers.is_empty() || tune.trials == 0 {
        return invalid("beta tuning needs methods, candidates and at least one trial");
    }
    if !(tune.sigma > 0.0) {
        return invalid("tuning noise level must be positive");
    }
    let scale = (cfg.m.max(cfg.n) as f64).sqrt();
    let candidates: Vec<f64> = tune.multipliers.iter().map(|c| c * scale).collect();
    if candidates.iter().any(|b| !(*b > 0.0)) {
        return invalid("beta candidates must be positive");
    }
    let trials: Vec<usize> = (0..tune.trials).collect();
    #[cfg(feature = "parallel")]
    let iter = trials.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = trials.iter();
    // errors[t][method][candidate]
    let errors: Vec<Vec<Vec<f64>>> = iter
        .map(|&t| -> Result<Vec<Vec<f64>>> {
            let cell = make_cell(cfg, tune.sigma, TUNING_STREAM_BASE | t as u64)?;
            let factors = svd(&cell.noisy)?;
            methods
                .iter()
                .map(|&method| {
                    candidates
                        .iter()
                        .map(|&beta| {
                            let spec = method.spec(beta * tune.sigma, cfg.a_fraction, cfg.p)?;
                            rse(&solve_with_factors(&factors, &spec).x_hat, &cell.truth)
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut out = BTreeMap::new();
    for (mi, &method) in methods.iter().enumerate() {
        let mut best = (f64::INFINITY, candidates[0]);
        for (ci, &beta) in candidates.iter().enumerate() {
            let mean = errors.iter().map(|t| t[mi][ci]).sum::<f64>() / errors.len() as f64;
            if mean < best.0 {
                best = (mean, beta);
            }
        }
        out.insert(method, best.1);
    }
    Ok(out)
}

/// Decimal rendering with at least nine significant digits.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// CSV with header `method,sigma,trial,rse,wall_ms`. Failed solves leave
/// the `rse` field empty.
pub fn records_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("method,sigma,trial,rse,wall_ms\n");
    for r in records {
        let rse = r.rse.map(format_decimal).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            format_decimal(r.sigma),
            r.trial,
            rse,
            format_decimal(r.wall_ms)
        )
        .unwrap();
    }
    out
}

/// CSV with header `method,sigma,mean_rse,std_rse`.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("method,sigma,mean_rse,std_rse\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.method,
            format_decimal(r.sigma),
            format_decimal(r.mean_rse),
            format_decimal(r.std_rse)
        )
        .unwrap();
    }
    out
}
