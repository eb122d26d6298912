//! Command-line front end: `eval`, `mean`, `verify`, `plot-data`, `extremal`, `recover`.
//!
//! Exit codes: 0 success, 1 failed verification check, 2 configuration error,
//! 3 numerical error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::elliptic::solve_modulus_for_period;
use crate::error::{Error, Result};
use crate::generator::{GeneratorConfig, GeneratorSpec};
use crate::matmean::{
    classical_mean, default_eps_schedule, kubo_ando_mean, parse_matrix, regularized_mean,
    write_matrix, ClassicalMean, PosDefMatrix,
};
use crate::repfun::{
    f_extremal, psi_recover, psi_recover_detailed, Extremal, RepFun, StripFunction, StripMethod,
    DEFAULT_TOLERANCE,
};
use crate::verify::{run_function_suite, run_mean_suite, run_order_suite, GridSpec, SuiteConfig};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "MOLNAR_SEED";

pub const DEFAULT_SEED: u64 = 20_190_143;

/// Half-width of the window around square-wave jumps, as a fraction of the period,
/// inside which `recover` does not require extrapolation to converge.
pub const JUMP_EXCLUSION: f64 = 0.05;

const EXIT_OK: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "molnar", version, about = "Symmetric Kubo-Ando means of Molnár type")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate f(x) over a log grid.
    Eval(EvalArgs),
    /// Mean of two matrices read from files.
    Mean(MeanArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// f_min, f_1, f_max and the arithmetic and harmonic envelopes, all relative to √x.
    PlotData(PlotArgs),
    /// f_min/√x and f_max/√x for one or more periods.
    Extremal(ExtremalArgs),
    /// Recover the generator from the boundary values of its strip function.
    Recover(RecoverArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionKind {
    Geometric,
    Arithmetic,
    Harmonic,
    Fn,
    Falpha,
    Fmin,
    Fmax,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[default]
    Auto,
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Generator file (TOML: period, form, coefficients, amplitude).
    #[arg(long, conflicts_with = "kind")]
    pub generator: Option<PathBuf>,
    /// Built-in representing function.
    #[arg(long, value_enum)]
    pub kind: Option<FunctionKind>,
    /// Index for `fn`.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Type c; accepts `e10` for e^10.
    #[arg(long, value_parser = parse_scalar)]
    pub c: Option<f64>,
    /// Frequency for `falpha`.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Period p = 2 ln c for `fmin` / `fmax`.
    #[arg(long, value_parser = parse_scalar)]
    pub p: Option<f64>,
    /// Strip-function method for generator files.
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Log grid `min:max:points_per_decade`.
    #[arg(long, default_value = "1e-3:1e3:8")]
    pub grid: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassicalArg {
    Arithmetic,
    Harmonic,
    Geometric,
    ParallelSum,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    /// First matrix file (must be positive definite unless `--regularize`).
    #[arg(long)]
    pub a: PathBuf,
    /// Second matrix file (positive semidefinite).
    #[arg(long)]
    pub b: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Closed-form classical mean instead of a representing function.
    #[arg(long, value_enum, conflicts_with_all = ["generator", "kind"])]
    pub classical: Option<ClassicalArg>,
    /// Take the limit of (A+εI) σ (B+εI) along the default ε schedule.
    #[arg(long)]
    pub regularize: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Function,
    Mean,
    Order,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Grid for scalar checks, `min:max:count` (count is the total number of points).
    #[arg(long)]
    pub grid: Option<String>,
    /// Random trials per matrix dimension.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Matrix dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol")]
    pub tolerances: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_parser = parse_scalar, default_value = "20")]
    pub p: f64,
    #[arg(long, default_value = "1e-12:1e12:8")]
    pub grid: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    /// One or more periods, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_scalar)]
    pub p: Vec<f64>,
    #[arg(long, default_value = "1e-12:1e12:8")]
    pub grid: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub generator: PathBuf,
    /// Sample points over one period.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parses a real number, also accepting `eX` for `exp(X)`.
pub fn parse_scalar(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_prefix('e') {
        Some(rest) => rest.parse::<f64>().map(f64::exp),
        None => s.parse::<f64>(),
    }
    .map_err(|e| format!("`{s}` is not a number: {e}"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Parses `min:max:points_per_decade` into log-spaced points. Exponents are stepped
/// exactly so that decades (and `x = 1`) land on the grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let (min, max, ppd) = grid_triple(spec)?;
    let ppd_int = ppd.round();
    if (ppd - ppd_int).abs() > 1e-12 || ppd_int < 1.0 {
        return Err(Error::Config(format!("points per decade `{ppd}` must be a positive integer")));
    }
    let (lo, hi) = (min.log10(), max.log10());
    let steps = ((hi - lo) * ppd_int + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|i| 10f64.powf(lo + i as f64 / ppd_int))
        .collect())
}

fn grid_triple(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("grid `{spec}` must look like min:max:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min = parse_scalar(parts[0]).map_err(Error::Config)?;
    let max = parse_scalar(parts[1]).map_err(Error::Config)?;
    let n = parse_scalar(parts[2]).map_err(Error::Config)?;
    if !(min > 0.0 && max > min) {
        return Err(bad());
    }
    Ok((min, max, n))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("{SEED_ENV}=`{v}`: {e}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn config_err(e: Error) -> Error {
    if e.is_config() { e } else { Error::Config(e.to_string()) }
}

pub fn load_generator(path: &Path) -> Result<GeneratorSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    GeneratorConfig::from_toml_str(&text)?.into_spec().map_err(config_err)
}

fn strip_function(gen: GeneratorSpec, method: MethodArg) -> Result<StripFunction> {
    match method {
        MethodArg::Auto => StripFunction::auto(gen),
        MethodArg::Series => StripFunction::new(gen, StripMethod::FourierSeries, DEFAULT_TOLERANCE),
        MethodArg::Quadrature => StripFunction::new(gen, StripMethod::Quadrature, DEFAULT_TOLERANCE),
    }
    .map_err(config_err)
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--kind {kind} needs --{flag}")))
}

fn period_of(src: &SourceArgs, kind: &str) -> Result<f64> {
    match (src.p, src.c) {
        (Some(p), _) => Ok(p),
        (None, Some(c)) if c > 1.0 => Ok(2.0 * c.ln()),
        (None, Some(c)) => Err(Error::Config(format!("--c {c} must exceed 1 for {kind}"))),
        (None, None) => Err(Error::Config(format!("--kind {kind} needs --p or --c"))),
    }
}

/// Builds the representing function named by `--generator` or `--kind`.
pub fn resolve_function(src: &SourceArgs) -> Result<RepFun> {
    match (&src.generator, src.kind) {
        (Some(path), None) => Ok(RepFun::from_generator(strip_function(load_generator(path)?, src.method)?)),
        (None, Some(kind)) => {
            let rf = match kind {
                FunctionKind::Geometric => RepFun::geometric(),
                FunctionKind::Arithmetic => RepFun::arithmetic(),
                FunctionKind::Harmonic => RepFun::harmonic(),
                FunctionKind::Fn => {
                    RepFun::fn_family(need(src.n, "n", "fn")?, need(src.c, "c", "fn")?)
                        .map_err(config_err)?
                }
                FunctionKind::Falpha => RepFun::falpha(need(src.alpha, "alpha", "falpha")?).map_err(config_err)?,
                FunctionKind::Fmin | FunctionKind::Fmax => {
                    let modulus = solve_modulus_for_period(period_of(src, "fmin/fmax")?)?;
                    if kind == FunctionKind::Fmin {
                        RepFun::f_min(modulus)
                    } else {
                        RepFun::f_max(modulus)
                    }
                }
            };
            Ok(rf)
        }
        (Some(_), Some(_)) => Err(Error::Config("--generator and --kind are mutually exclusive".into())),
        (None, None) => Err(Error::Config("a function source is required: --generator or --kind".into())),
    }
}

fn emit(output: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(Error::Io),
    }
}

fn csv_eval(grid: &[f64], f: impl Fn(f64) -> Result<Vec<f64>> + Sync) -> Result<Vec<Vec<f64>>> {
    grid.par_iter().map(|&x| f(x)).collect()
}

fn format_rows(header: &str, grid: &[f64], rows: &[Vec<f64>]) -> String {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for (x, row) in grid.iter().zip(rows) {
        let _ = write!(text, "{x:e}");
        for v in row {
            let _ = write!(text, ",{v:e}");
        }
        text.push('\n');
    }
    text
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = parse_grid(&args.grid)?;
    let rf = resolve_function(&args.source)?;
    let rows = csv_eval(&grid, |x| {
        let fx = rf.eval_real(x)?;
        Ok(vec![fx, fx / x.sqrt()])
    })?;
    emit(&args.output, &format_rows("x,f(x),f(x)/sqrt(x)", &grid, &rows), out)?;
    Ok(EXIT_OK)
}

fn cmd_extremal(args: &ExtremalArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = parse_grid(&args.grid)?;
    let moduli = args
        .p
        .iter()
        .map(|&p| solve_modulus_for_period(p))
        .collect::<Result<Vec<_>>>()?;
    let header = if args.p.len() == 1 {
        "x,f_min/sqrt(x),f_max/sqrt(x)".to_string()
    } else {
        let cols: Vec<String> = args
            .p
            .iter()
            .map(|p| format!("f_min/sqrt(x)[p={p}],f_max/sqrt(x)[p={p}]"))
            .collect();
        format!("x,{}", cols.join(","))
    };
    let rows = csv_eval(&grid, |x| {
        let mut row = Vec::with_capacity(2 * moduli.len());
        for m in &moduli {
            row.push(f_extremal(m, x, Extremal::Min)? / x.sqrt());
            row.push(f_extremal(m, x, Extremal::Max)? / x.sqrt());
        }
        Ok(row)
    })?;
    emit(&args.output, &format_rows(&header, &grid, &rows), out)?;
    Ok(EXIT_OK)
}

fn cmd_plot(args: &PlotArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = parse_grid(&args.grid)?;
    let modulus = solve_modulus_for_period(args.p)?;
    let f1 = RepFun::fn_family(1, (0.5 * args.p).exp()).map_err(config_err)?;
    let rows = csv_eval(&grid, |x| {
        let r = x.sqrt();
        Ok(vec![
            f_extremal(&modulus, x, Extremal::Min)? / r,
            f1.eval_real(x)? / r,
            f_extremal(&modulus, x, Extremal::Max)? / r,
            0.5 * (1.0 + x) / r,
            2.0 * x / (1.0 + x) / r,
        ])
    })?;
    let header = "x,f_min/sqrt(x),f_1/sqrt(x),f_max/sqrt(x),f_arithmetic/sqrt(x),f_harmonic/sqrt(x)";
    emit(&args.output, &format_rows(header, &grid, &rows), out)?;
    Ok(EXIT_OK)
}

fn read_matrix(path: &Path) -> Result<crate::matmean::CMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

fn cmd_mean(args: &MeanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let a_raw = read_matrix(&args.a)?;
    let b_raw = read_matrix(&args.b)?;
    let classical = args.classical.map(|c| match c {
        ClassicalArg::Arithmetic => ClassicalMean::Arithmetic,
        ClassicalArg::Harmonic => ClassicalMean::Harmonic,
        ClassicalArg::Geometric => ClassicalMean::Geometric,
        ClassicalArg::ParallelSum => ClassicalMean::ParallelSum,
    });
    let function = match classical {
        None => Some(resolve_function(&args.source)?),
        Some(_) if args.regularize => Some(match args.classical.unwrap() {
            ClassicalArg::Arithmetic => RepFun::arithmetic(),
            ClassicalArg::Harmonic => RepFun::harmonic(),
            ClassicalArg::Geometric => RepFun::geometric(),
            ClassicalArg::ParallelSum => RepFun::custom("parallel sum", |x| x / (1.0 + x)),
        }),
        Some(_) => None,
    };
    let value = if args.regularize {
        let a = PosDefMatrix::semidefinite(a_raw)?;
        let b = PosDefMatrix::semidefinite(b_raw)?;
        let r = regularized_mean(function.as_ref().expect("set above"), &a, &b, &default_eps_schedule())?;
        if !r.converged {
            let _ = writeln!(
                err,
                "warning: regularization gap {:e} exceeds {:e}; the result may be inaccurate",
                r.cauchy_gap,
                crate::matmean::REGULARIZATION_GAP
            );
        }
        r.value
    } else {
        let a = PosDefMatrix::new(a_raw)?;
        let b = PosDefMatrix::semidefinite(b_raw)?;
        match (classical, &function) {
            (Some(kind), _) => classical_mean(kind, &a, &b)?,
            (None, Some(f)) => kubo_ando_mean(f, &a, &b)?,
            (None, None) => unreachable!("function resolved when no classical mean is given"),
        }
    };
    emit(&args.output, &write_matrix(value.entries()), out)?;
    Ok(EXIT_OK)
}

fn suite_config(args: &VerifyArgs) -> Result<SuiteConfig> {
    let mut cfg = SuiteConfig { seed: resolve_seed(args.seed)?, ..SuiteConfig::default() };
    if let Some(g) = &args.grid {
        let (min, max, count) = grid_triple(g)?;
        if count.fract() != 0.0 || count < 2.0 {
            return Err(Error::Config(format!("grid count `{count}` must be an integer ≥ 2")));
        }
        cfg.grid = GridSpec { count: count as usize, min, max };
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(d) = &args.dims {
        cfg.matrix_dims = d.clone();
    }
    for item in &args.tolerances {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance `{item}` must be name=value")))?;
        let value = parse_scalar(value).map_err(Error::Config)?;
        cfg.tolerances.insert(name.trim().to_string(), value);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = suite_config(args)?;
    let report = match args.suite {
        Suite::Function => {
            let rf = resolve_function(&args.source)?;
            let c = args
                .source
                .c
                .or_else(|| rf.period_c())
                .ok_or_else(|| Error::Config("the function suite needs --c".into()))?;
            run_function_suite(&rf, c, &cfg)
        }
        Suite::Mean => run_mean_suite(&resolve_function(&args.source)?, &cfg),
        Suite::Order => {
            let p = args
                .source
                .p
                .or_else(|| args.source.c.map(|c| 2.0 * c.ln()))
                .ok_or_else(|| Error::Config("the order suite needs --p".into()))?;
            run_order_suite(p, &cfg)
        }
    };
    let mut json = report.to_json();
    json.push('\n');
    emit(&args.output, &json, out)?;
    for check in report.failures() {
        let _ = writeln!(
            err,
            "FAIL {}: worst violation {:e} > tolerance {:e}; witness: {}",
            check.name, check.worst_violation, check.tolerance, check.witness
        );
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_recover(args: &RecoverArgs, out: &mut dyn Write) -> Result<i32> {
    if args.points < 1 {
        return Err(Error::Config("--points must be at least 1".into()));
    }
    let gen = load_generator(&args.generator)?;
    let p = gen.period();
    let jumps = gen.jump_spacing();
    let sf = strip_function(gen.clone(), args.method)?;
    let lambdas: Vec<f64> = (0..args.points)
        .map(|k| -0.5 * p + p * k as f64 / args.points as f64)
        .collect();
    let rows = csv_eval(&lambdas, |lam| {
        let near_jump = jumps.is_some_and(|h| {
            let r = lam.rem_euclid(h);
            r.min(h - r) < JUMP_EXCLUSION * p
        });
        let recovered = if near_jump {
            psi_recover_detailed(&sf, lam)?.value
        } else {
            psi_recover(&sf, lam)?
        };
        let truth = gen.eval(lam);
        Ok(vec![truth, recovered, (recovered - truth).abs()])
    })?;
    emit(&args.output, &format_rows("lambda,psi_true,psi_recovered,abs_err", &lambdas, &rows), out)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Mean(a) => cmd_mean(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::PlotData(a) => cmd_plot(a, out),
        Command::Extremal(a) => cmd_extremal(a, out),
        Command::Recover(a) => cmd_recover(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL }
        }
    }
}
