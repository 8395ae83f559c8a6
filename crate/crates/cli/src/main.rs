//! Command-line front end: every computation of the library, with JSON or CSV output.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ginibre_gumbel::convergence::{self, Format};
use ginibre_gumbel::metrics::{self, DistanceReport, ExactCdf};
use ginibre_gumbel::montecarlo::{self, SampleBatch};
use ginibre_gumbel::scaling::{make_constants, u_n, Scaling, ScalingConstants};
use ginibre_gumbel::{asymptotics, exact_cdf, ginibre, selftest, Error};

#[derive(Parser, Debug)]
#[command(name = "ginibre-gumbel", version, about = "Exact spectral-radius laws of complex Ginibre matrices and their Gumbel limit")]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = OutFormat::Json, global = true)]
    format: OutFormat,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingArg {
    Wn,
    Xn,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Wn => Scaling::Wn,
            ScalingArg::Xn => Scaling::Xn,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleScalingArg {
    Raw,
    Wn,
    Xn,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Centring and scaling constants for size n.
    Constants {
        #[arg(long, value_parser = parse_count)]
        n: u64,
    },
    /// Exact distribution function on a grid.
    Cdf {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Wn)]
        scaling: ScalingArg,
        /// `lo:hi:points`; default is a Gumbel-quantile grid.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Points of the default grid.
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Exact tail of Gamma(n - k) at the W_n threshold next to its normal approximation.
    Tail {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Exact -log F_{W_n}(x) next to its large-n form.
    Beta {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Wasserstein-1 distance to the Gumbel law.
    W1 {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Xn)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Kolmogorov distance to the Gumbel law.
    Ks {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Xn)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Split of the W1 distance over the three windows.
    Decompose {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = ScalingArg::Xn)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// W1 distance between the two scalings.
    Gap {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Exact distances and predictions over a ladder of sizes.
    Ladder {
        /// Comma-separated sizes, e.g. `1e4,1e5,1e6`.
        #[arg(long)]
        ns: String,
        #[arg(long, value_enum, default_value_t = ScalingArg::Xn)]
        scaling: ScalingArg,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Draws of the squared spectral radius via independent gamma variables.
    Sample {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_parser = parse_usize)]
        size: usize,
        #[arg(long)]
        seed: u64,
        /// Bias budget; 0 draws every shape.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = SampleScalingArg::Raw)]
        scaling: SampleScalingArg,
        /// Also write little-endian f64 values here, with a `.json` sidecar.
        #[arg(long)]
        binary: Option<PathBuf>,
    },
    /// Compare eigenvalue-based and gamma-based draws with a two-sample test.
    ValidateKostlan {
        #[arg(long, value_parser = parse_usize)]
        n: usize,
        #[arg(long, value_parser = parse_usize)]
        size: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Built-in numerical checks.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    /// A validation that ran but did not pass.
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Rows sharing one serde schema, so JSON and CSV carry identical numbers.
fn emit<T: Serialize>(out: &mut dyn Write, format: OutFormat, rows: &[T], single: bool) -> CliResult<()> {
    match format {
        OutFormat::Json => {
            let text = if single && rows.len() == 1 {
                serde_json::to_string_pretty(&rows[0])
            } else {
                serde_json::to_string_pretty(rows)
            }
            .map_err(Error::from)?;
            writeln!(out, "{text}")?;
        }
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r).map_err(Error::from)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    log_cdf: f64,
    cdf: f64,
    truncation_bound: f64,
}

#[derive(Serialize)]
struct TailRow {
    n: u64,
    k: u64,
    x: f64,
    u: f64,
    exact: f64,
    approx: f64,
    ratio: f64,
    claimed_rel_error_order: f64,
}

#[derive(Serialize)]
struct BetaRow {
    n: u64,
    x: f64,
    threshold: f64,
    beta_exact: f64,
    error_bound: f64,
    saturated: bool,
    beta_asym: f64,
    ratio: f64,
    claimed_rel_error_order: f64,
}

#[derive(Serialize)]
struct DistanceRow {
    n: u64,
    scaling: String,
    kind: String,
    value: f64,
    quadrature_tol: f64,
    quadrature_error: f64,
    tail_remainder_bound: f64,
    cdf_error_bound: f64,
    error_budget: f64,
    argmax_x: Option<f64>,
    window_lo: Option<f64>,
    window_hi: Option<f64>,
    range_lo: f64,
    range_hi: f64,
}

impl DistanceRow {
    fn new(n: u64, scaling: &str, r: &DistanceReport) -> Self {
        DistanceRow {
            n,
            scaling: scaling.to_string(),
            kind: format!("{:?}", r.kind).to_lowercase(),
            value: r.value,
            quadrature_tol: r.quadrature_tol,
            quadrature_error: r.quadrature_error,
            tail_remainder_bound: r.tail_remainder_bound,
            cdf_error_bound: r.cdf_error_bound,
            error_budget: r.error_budget(),
            argmax_x: r.argmax_x,
            window_lo: r.window.map(|w| w.0),
            window_hi: r.window.map(|w| w.1),
            range_lo: r.range.0,
            range_hi: r.range.1,
        }
    }
}

#[derive(Serialize)]
struct DecompositionRow {
    n: u64,
    scaling: String,
    #[serde(rename = "I")]
    left: f64,
    #[serde(rename = "II")]
    middle: f64,
    #[serde(rename = "III")]
    right: f64,
    total: f64,
    middle_fraction: f64,
    window_lo: f64,
    window_hi: f64,
    error_bound: f64,
}

#[derive(Serialize)]
struct ValueRow {
    value: f64,
}

#[derive(Serialize)]
struct KostlanRow {
    n: usize,
    size: usize,
    seed: u64,
    statistic: f64,
    p_value: f64,
    max_residual: f64,
    pass: bool,
}

/// Integer counts, also written as `1e6`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    match convergence::parse_sizes(s) {
        Ok(v) if v.len() == 1 => Ok(v[0]),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::Lib(Error::Domain(format!("grid must be lo:hi:points, got {spec:?}")));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo < hi) || points < 2 {
        return Err(bad());
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn constants(n: u64) -> CliResult<ScalingConstants> {
    Ok(make_constants(n)?)
}

fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let fmt = cli.format;
    match &cli.command {
        Command::Constants { n } => emit(out, fmt, &[constants(*n)?], true),
        Command::Cdf { n, scaling, grid, points, eps } => {
            let c = constants(*n)?;
            let kind: Scaling = (*scaling).into();
            let grid = match grid {
                Some(g) => parse_grid(g)?,
                None => exact_cdf::default_grid(&c, kind, *points),
            };
            let tab = exact_cdf::tabulate(&c, kind, &grid, *eps)?;
            let rows: Vec<CdfRow> = tab
                .grid
                .iter()
                .zip(&tab.log_cdf)
                .map(|(&x, l)| CdfRow { x, log_cdf: l.value(), cdf: l.prob(), truncation_bound: tab.truncation_bound })
                .collect();
            emit(out, fmt, &rows, false)
        }
        Command::Tail { n, k, x } => {
            let c = constants(*n)?;
            let approx = asymptotics::tail_approx(&c, *k, *x)?;
            let exact = exact_cdf::exact_tail(&c, *k, *x)?;
            let row = TailRow {
                n: *n,
                k: *k,
                x: *x,
                u: u_n(&c, *k as f64, *x),
                exact,
                approx: approx.value,
                ratio: exact / approx.value,
                claimed_rel_error_order: approx.claimed_rel_error_order,
            };
            emit(out, fmt, &[row], true)
        }
        Command::Beta { n, x, eps } => {
            let c = constants(*n)?;
            let b = exact_cdf::beta(&c, Scaling::Wn, *x, *eps)?;
            let a = asymptotics::beta_asym(&c, *x)?;
            let row = BetaRow {
                n: *n,
                x: *x,
                threshold: b.threshold,
                beta_exact: b.beta,
                error_bound: b.error_bound,
                saturated: b.saturated,
                beta_asym: a.value,
                ratio: b.beta / a.value,
                claimed_rel_error_order: a.claimed_rel_error_order,
            };
            emit(out, fmt, &[row], true)
        }
        Command::W1 { n, scaling, tol } | Command::Ks { n, scaling, tol } => {
            let c = constants(*n)?;
            let kind: Scaling = (*scaling).into();
            let model = ExactCdf::for_tolerance(c, kind, *tol);
            let r = if matches!(cli.command, Command::W1 { .. }) {
                metrics::w1_to_gumbel(&model, *tol)?
            } else {
                metrics::ks_to_gumbel(&model, *tol)?
            };
            emit(out, fmt, &[DistanceRow::new(*n, kind.name(), &r)], true)
        }
        Command::Decompose { n, scaling, tol } => {
            let c = constants(*n)?;
            let kind: Scaling = (*scaling).into();
            let d = metrics::decompose(&ExactCdf::for_tolerance(c, kind, *tol), &c, *tol)?;
            let row = DecompositionRow {
                n: *n,
                scaling: kind.name().to_string(),
                left: d.left,
                middle: d.middle,
                right: d.right,
                total: d.total(),
                middle_fraction: d.middle_fraction(),
                window_lo: d.window.0,
                window_hi: d.window.1,
                error_bound: d.error_bound,
            };
            emit(out, fmt, &[row], true)
        }
        Command::Gap { n, tol } => {
            let c = constants(*n)?;
            let r = metrics::scaling_gap(&c, *tol)?;
            emit(out, fmt, &[DistanceRow::new(*n, "xn-wn", &r)], true)
        }
        Command::Ladder { ns, scaling, tol } => {
            let sizes = convergence::parse_sizes(ns)?;
            let records = convergence::run_ladder(&sizes, (*scaling).into(), *tol)?;
            convergence::report(&records, fmt.into(), out)?;
            Ok(())
        }
        Command::Sample { n, size, seed, delta, scaling, binary } => {
            let raw = montecarlo::sample_ymax(*n, *size, *seed, *delta)?;
            let batch = match scaling {
                SampleScalingArg::Raw => raw,
                SampleScalingArg::Wn | SampleScalingArg::Xn => {
                    let target = if matches!(scaling, SampleScalingArg::Wn) { Scaling::Wn } else { Scaling::Xn };
                    montecarlo::transform_batch(&raw, &constants(*n)?, target)?
                }
            };
            if let Some(path) = binary {
                batch.write_binary(path)?;
            }
            emit_batch(out, fmt, &batch)
        }
        Command::ValidateKostlan { n, size, seed } => {
            let direct = ginibre::sample_radius_sq(*n, *size, *seed)?;
            let gammas = montecarlo::sample_ymax(*n as u64, *size, seed.wrapping_add(1), 0.0)?;
            let t = montecarlo::ks_two_sample(&direct, &gammas)?;
            let row = KostlanRow {
                n: *n,
                size: *size,
                seed: *seed,
                statistic: t.statistic,
                p_value: t.p_value,
                max_residual: direct.max_residual.unwrap_or(0.0),
                pass: t.p_value > 0.001,
            };
            let pass = row.pass;
            emit(out, fmt, &[row], true)?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Rejected(format!("two-sample KS p-value {:.3e} <= 0.001", t.p_value)))
            }
        }
        Command::Selftest => {
            let checks = selftest::run()?;
            emit(out, fmt, &checks, false)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Rejected(format!("failed checks: {}", failed.join(", "))))
            }
        }
    }
}

fn emit_batch(out: &mut dyn Write, fmt: OutFormat, batch: &SampleBatch) -> CliResult<()> {
    match fmt {
        OutFormat::Json => emit(out, fmt, &[batch], true),
        OutFormat::Csv => {
            let rows: Vec<ValueRow> = batch.values.iter().map(|&value| ValueRow { value }).collect();
            emit(out, fmt, &rows, false)
        }
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Rejected(_) => 1,
        Failure::Lib(e) if e.is_numerical() => 2,
        Failure::Lib(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.output {
        Some(path) => std::fs::File::create(path)
            .map_err(Failure::from)
            .and_then(|f| {
                let mut w = std::io::BufWriter::new(f);
                run(&cli, &mut w)?;
                w.flush()?;
                Ok(())
            }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run(&cli, &mut lock)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Rejected(msg) => eprintln!("validation failed: {msg}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
