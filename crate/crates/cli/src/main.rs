use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use elma::bench::{records_csv, run_sweep, summarize, summary_csv, tune_betas, BenchConfig, TuneConfig};
use elma::image::{self, Aggregation, NssConfig};
use elma::penalty::{curves_csv, emit_curves};
use elma::{rank_of, solve, Matrix, Method, RngState};

/// Low-rank matrix and image denoising by firm thresholding of singular values.
#[derive(Parser, Debug)]
#[command(name = "elma", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat key=value file; keys are flag names without dashes. Flags on the
    /// command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the low-rank approximation problem for one CSV matrix.
    DenoiseMatrix(DenoiseMatrixArgs),
    /// Monte-Carlo RSE benchmark on random low-rank matrices.
    SynthBench(SynthBenchArgs),
    /// Denoise a PGM image with patch-group low-rank estimation.
    DenoiseImage(DenoiseImageArgs),
    /// Add white Gaussian noise to a PGM image.
    AddNoise(AddNoiseArgs),
    /// Tabulate penalty, s-function and threshold curves.
    ThresholdPlot(ThresholdPlotArgs),
}

#[derive(Args, Debug)]
struct DenoiseMatrixArgs {
    /// Input matrix, one row per line, comma separated.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the estimate.
    #[arg(long)]
    output: PathBuf,
    /// elma, nnm (svt), ps or wnnm.
    #[arg(long, default_value = "elma")]
    method: Method,
    #[arg(long)]
    lambda: f64,
    /// Curvature as a fraction of its convexity bound, a = a_fraction / lambda.
    #[arg(long, default_value_t = 0.6)]
    a_fraction: f64,
    /// p-shrinkage exponent (p <= 1).
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    p: f64,
}

#[derive(Args, Debug)]
struct SynthBenchArgs {
    #[arg(long, default_value_t = 200)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Rank of the ground truth.
    #[arg(long, default_value_t = 100)]
    rank: usize,
    /// Noise levels: a comma list ("2,6,10") or an integer range ("1:10").
    #[arg(long, default_value = "1:10")]
    sigma: String,
    #[arg(long, default_value_t = 15)]
    trials: usize,
    /// Comma separated methods.
    #[arg(long, default_value = "elma,nnm,ps,wnnm")]
    methods: String,
    /// Fixed betas as method=value pairs ("elma=15,nnm=10"). Methods without
    /// one are tuned first.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, default_value_t = 0.6)]
    a_fraction: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    p: f64,
    /// Noise level used for beta tuning.
    #[arg(long, default_value_t = 5.0)]
    tune_sigma: f64,
    /// Trials per candidate beta during tuning.
    #[arg(long, default_value_t = 3)]
    tune_trials: usize,
    /// Record per-solve wall time (makes the records CSV non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Per-trial records CSV.
    #[arg(long, default_value = "bench_records.csv")]
    output: PathBuf,
    /// Mean/std per method and noise level.
    #[arg(long, default_value = "bench_summary.csv")]
    summary: PathBuf,
}

#[derive(Args, Debug)]
struct DenoiseImageArgs {
    /// Noisy PGM image.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Noise standard deviation of the input.
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value = "elma")]
    method: Method,
    /// lambda = beta * sigma (default depends on the method).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    a_fraction: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, default_value_t = 8)]
    patch_size: usize,
    #[arg(long, default_value_t = 4)]
    stride: usize,
    /// Half-width of the block-matching window.
    #[arg(long, default_value_t = 20)]
    search_radius: usize,
    #[arg(long, default_value_t = 60)]
    group_size: usize,
    /// uniform or inverse-rank.
    #[arg(long, default_value = "uniform")]
    aggregation: Aggregation,
    /// Clean image; prints psnr_db=<value> when given.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AddNoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    sigma: f64,
}

#[derive(Args, Debug)]
struct ThresholdPlotArgs {
    /// elma (firm), nnm (soft), ps or wnnm.
    #[arg(long, default_value = "elma")]
    family: Method,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    a_fraction: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    p: f64,
    /// Sample interval as lo:hi.
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long)]
    output: PathBuf,
}

/// Writes through a temporary file in the target directory so a failed run
/// never leaves a partial output behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_sigma_list(s: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once(':') {
        let (lo, hi): (i64, i64) = (lo.trim().parse()?, hi.trim().parse()?);
        if lo > hi {
            bail!("empty sigma range {s}");
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sigma {v:?}")))
        .collect()
}

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for part in s.split(',') {
        let m: Method = part.trim().parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn parse_betas(s: &str) -> Result<BTreeMap<Method, f64>> {
    let mut out = BTreeMap::new();
    for pair in s.split(',') {
        let (m, v) = pair
            .split_once('=')
            .with_context(|| format!("expected method=value, got {pair:?}"))?;
        out.insert(m.trim().parse()?, v.trim().parse()?);
    }
    Ok(out)
}

fn denoise_matrix(args: DenoiseMatrixArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let y = Matrix::from_csv(&text)?;
    let spec = args.method.spec(args.lambda, args.a_fraction, args.p)?;
    let res = solve(&y, &spec)?;
    write_atomic(&args.output, res.x_hat.to_csv().as_bytes())?;
    println!(
        "rank={} sigma_in={} sigma_out={}",
        rank_of(&res, 0.0),
        join(&res.sigma_in),
        join(&res.sigma_out)
    );
    Ok(())
}

fn synth_bench(args: SynthBenchArgs, seed: u64) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let mut betas = match &args.beta {
        Some(s) => parse_betas(s)?,
        None => BTreeMap::new(),
    };
    betas.retain(|m, _| methods.contains(m));
    let mut cfg = BenchConfig {
        m: args.m,
        n: args.n,
        rank: args.rank,
        sigma_list: parse_sigma_list(&args.sigma)?,
        trials: args.trials,
        betas: BTreeMap::new(),
        a_fraction: args.a_fraction,
        p: args.p,
        seed,
        timing: args.timing,
    };
    let untuned: Vec<Method> = methods.iter().copied().filter(|m| !betas.contains_key(m)).collect();
    if !untuned.is_empty() {
        let tune = TuneConfig {
            sigma: args.tune_sigma,
            trials: args.tune_trials,
            ..TuneConfig::default()
        };
        for (m, b) in tune_betas(&cfg, &untuned, &tune)? {
            eprintln!("tuned beta {m}={b}");
            betas.insert(m, b);
        }
    }
    cfg.betas = betas;
    let records = run_sweep(&cfg)?;
    let summary = summarize(&records)?;
    write_atomic(&args.output, records_csv(&records).as_bytes())?;
    write_atomic(&args.summary, summary_csv(&summary).as_bytes())?;
    eprintln!("{} records", records.len());
    Ok(())
}

fn denoise_image(args: DenoiseImageArgs) -> Result<()> {
    let noisy = image::read_pgm(&args.input)?;
    let mut cfg = NssConfig::new(args.sigma, args.method);
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    cfg.a_fraction = args.a_fraction;
    cfg.p = args.p;
    cfg.patch_size = args.patch_size;
    cfg.stride = args.stride;
    cfg.search_radius = args.search_radius;
    cfg.group_size = args.group_size;
    cfg.aggregation = args.aggregation;
    // The reference is read up front so a bad path fails before the long run.
    let reference = args.reference.as_ref().map(image::read_pgm).transpose()?;
    let out = if args.sigma == 0.0 {
        noisy.clone()
    } else {
        image::denoise_image(&noisy, &cfg)?
    };
    write_atomic(&args.output, &image::encode_pgm(&out))?;
    if let Some(clean) = reference {
        let db = image::psnr(&out.quantized(), &clean)?;
        println!("psnr_db={}", image::format_psnr(db));
    }
    Ok(())
}

fn add_noise(args: AddNoiseArgs, seed: u64) -> Result<()> {
    let clean = image::read_pgm(&args.input)?;
    let noisy = image::add_noise(&clean, args.sigma, &mut RngState::new(seed))?;
    write_atomic(&args.output, &image::encode_pgm(&noisy))
}

fn threshold_plot(args: ThresholdPlotArgs) -> Result<()> {
    let (lo, hi) = args
        .range
        .split_once(':')
        .with_context(|| format!("range must be lo:hi, got {:?}", args.range))?;
    let (lo, hi): (f64, f64) = (lo.trim().parse()?, hi.trim().parse()?);
    let spec = args.family.spec(args.lambda, args.a_fraction, args.p)?;
    let rows = emit_curves(&spec, lo, hi, args.step)?;
    write_atomic(&args.output, curves_csv(&rows).as_bytes())
}

/// Reads `key=value` lines, skipping blanks and `#` comments.
fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        let key = k.trim().replace('_', "-");
        if key == "config" {
            bail!("{}:{}: config files cannot nest", path.display(), i + 1);
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Appends config entries as flags unless the same flag was given on the
/// command line. `true`/`false` values toggle switches.
fn merge_config(mut argv: Vec<OsString>, entries: Vec<(String, String)>) -> Vec<OsString> {
    let present = |argv: &[OsString], flag: &str| {
        argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };
    for (key, value) in entries {
        let flag = format!("--{key}");
        if present(&argv, &flag) {
            continue;
        }
        match value.as_str() {
            "true" => argv.push(flag.into()),
            "false" => {}
            _ => argv.push(format!("{flag}={value}").into()),
        }
    }
    argv
}

fn run() -> Result<()> {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config_path(&argv) {
        argv = merge_config(argv, read_config(&path)?);
    }
    let cli = Cli::parse_from(argv);
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::DenoiseMatrix(a) => denoise_matrix(a),
        Command::SynthBench(a) => synth_bench(a, cli.seed),
        Command::DenoiseImage(a) => denoise_image(a),
        Command::AddNoise(a) => add_noise(a, cli.seed),
        Command::ThresholdPlot(a) => threshold_plot(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
