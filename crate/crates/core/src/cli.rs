//! Command-line surface. [`run`] takes the argument list and output sinks and
//! returns the process exit code: 0 on success, 2 when a solver fails or does
//! not converge, 1 on usage, parse or I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::benchmarks::{self, BenchmarkName, Example0Params};
use crate::dual::{dual_point, dual_value_and_residual, Classification};
use crate::error::{Error, Result};
use crate::model::PolynomialProblem;
use crate::parallel::Execution;
use crate::sdp::{build_sdp, export_sdpa};
use crate::strategies::{solve, SigmaSeed, SolveReport, Strategy, StrategyConfig, Translation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Dimensions swept by `table` by default.
pub const DEFAULT_DIMS: [usize; 9] = [2, 5, 10, 20, 50, 100, 200, 500, 1000];
/// Extra dimensions added by `table --full`.
pub const FULL_DIMS: [usize; 4] = [2000, 3000, 4000, 5000];

#[derive(Debug, Parser)]
#[command(name = "canodual", version, about = "Canonical duality solver for fourth-order polynomial minimization")]
pub struct Cli {
    /// Seed for randomized translations without an explicit seed.
    #[arg(long, global = true, env = "CANODUAL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one strategy on a benchmark or a JSON problem.
    Run(RunArgs),
    /// Sweep dimensions of rosenbrock or dixon-price and print CSV.
    Table(TableArgs),
    /// Sample the primal or dual function on a 1-D or 2-D grid (CSV).
    Grid(GridArgs),
    /// Semidefinite program export.
    #[command(subcommand)]
    Sdp(SdpCommand),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Built-in benchmark: example0, colville, zettle, styblinski-tang, rosenbrock, dixon-price.
    #[arg(long, group = "source")]
    pub bench: Option<String>,
    /// JSON problem file.
    #[arg(long, group = "source")]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub source: Source,
    /// Dimension for rosenbrock and dixon-price.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Linear perturbation for example0 (linear coefficient becomes f - delta).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, default_value = "s1")]
    pub strategy: String,
    /// `auto` or a comma-separated vector. Benchmarks default to their published seed, JSON problems to auto.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma0: Option<String>,
    /// `none`, a scalar offset such as `+1`, or `gauss[:<seed>]:<scale>`. Dixon-price defaults to `+1`.
    #[arg(long, allow_hyphen_values = true)]
    pub translate: Option<String>,
    /// Initial barrier weight for s3; 0 disables the barrier.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value = "human")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub bench: String,
    /// Comma-separated dimensions; an empty list prints only the header.
    #[arg(long)]
    pub dims: Option<String>,
    /// Append the 2000..5000 dimensions.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub solve: TableSolveArgs,
}

#[derive(Debug, Args)]
pub struct TableSolveArgs {
    #[arg(long, default_value = "s4")]
    pub strategy: String,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub translate: Option<String>,
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Surface {
    Primal,
    Dual,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "primal")]
    pub surface: Surface,
    /// One `lo:hi` range per axis, comma-separated; a single range is reused for every axis.
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    pub range: String,
    /// Samples per axis, endpoints included.
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
}

#[derive(Debug, Subcommand)]
pub enum SdpCommand {
    /// Write the SDP in sparse SDPA format.
    Export(SdpExportArgs),
}

#[derive(Debug, Args)]
pub struct SdpExportArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        // closed stdout, e.g. piped into `head`
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::SingularDual
        | Error::NoFeasibleSigma { .. }
        | Error::SeedNotAdmissible(_)
        | Error::FeasibleConeLost => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, cli.seed, out),
        Command::Table(a) => cmd_table(a, cli.seed, out),
        Command::Grid(a) => cmd_grid(a, out),
        Command::Sdp(SdpCommand::Export(a)) => cmd_sdp_export(a, out),
    }
}

struct Loaded {
    problem: PolynomialProblem,
    bench: Option<BenchmarkName>,
}

fn load_problem(a: &ProblemArgs) -> Result<Loaded> {
    if let Some(path) = &a.source.problem {
        let text = fs::read_to_string(path)?;
        return Ok(Loaded { problem: PolynomialProblem::from_json(&text)?, bench: None });
    }
    let name: BenchmarkName = a.source.bench.as_deref().unwrap_or_default().parse()?;
    let problem = match name {
        BenchmarkName::Example0 => benchmarks::example0(Example0Params { delta: a.delta, ..Default::default() })?,
        _ => benchmarks::build(name, a.n)?,
    };
    Ok(Loaded { problem, bench: Some(name) })
}

fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

/// `none`, `<float>` (e.g. `+1`), `gauss:<scale>` or `gauss:<seed>:<scale>`.
pub fn parse_translation(text: &str, default_seed: u64) -> Result<Translation> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("none") {
        return Ok(Translation::None);
    }
    if let Some(rest) = t.strip_prefix("gauss") {
        let parts: Vec<&str> = rest.split(':').skip(1).collect();
        let bad = || Error::Parse(format!("bad gaussian translation {text:?}"));
        let (seed, scale) = match parts.as_slice() {
            [] => (default_seed, 1.0),
            [scale] => (default_seed, scale.parse().map_err(|_| bad())?),
            [seed, scale] => (seed.parse().map_err(|_| bad())?, scale.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        if !rest.is_empty() && !rest.starts_with(':') {
            return Err(bad());
        }
        return Ok(Translation::Gaussian { seed, scale });
    }
    if t.contains(',') {
        return Ok(Translation::Vector(parse_vector(t)?));
    }
    t.parse::<f64>()
        .map(Translation::Offset)
        .map_err(|_| Error::Parse(format!("bad translation {text:?}")))
}

#[allow(clippy::too_many_arguments)]
fn strategy_config(
    problem: &PolynomialProblem,
    bench: Option<BenchmarkName>,
    strategy: &str,
    sigma0: Option<&str>,
    translate: Option<&str>,
    penalty: Option<f64>,
    max_iter: Option<usize>,
    seed: u64,
) -> Result<StrategyConfig> {
    let strategy: Strategy = strategy.parse()?;
    let sigma0 = match sigma0 {
        Some(s) if s.trim().eq_ignore_ascii_case("auto") => SigmaSeed::Auto,
        Some(s) => SigmaSeed::Given(parse_vector(s)?),
        None => match bench {
            Some(b) => SigmaSeed::Given(benchmarks::reference_sigma0(b, problem.dim())?),
            None => SigmaSeed::Auto,
        },
    };
    let translation = match translate {
        Some(t) => parse_translation(t, seed)?,
        None if bench == Some(BenchmarkName::DixonPrice) => Translation::Offset(1.0),
        None => Translation::None,
    };
    let mut cfg = StrategyConfig { strategy, sigma0, translation, penalty, ..Default::default() };
    if let Some(mi) = max_iter {
        cfg.solver.max_iter = mi;
    }
    cfg.solver.validate()?;
    Ok(cfg)
}

/// Floats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn fmt_vec(v: &DVector<f64>, sep: &str) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(sep)
}

fn render_human(r: &SolveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "strategy      {}", r.strategy);
    let _ = writeln!(s, "termination   {:?}", r.termination);
    let _ = writeln!(s, "x*            [{}]", fmt_vec(&r.x_star, ", "));
    let _ = writeln!(s, "sigma*        [{}]", fmt_vec(&r.sigma_star, ", "));
    let _ = writeln!(s, "P(x*)         {}", fmt_f64(r.p_value));
    let _ = writeln!(s, "P^d(sigma*)   {}", fmt_f64(r.pd_value));
    let _ = writeln!(s, "gap           {}", fmt_f64(r.gap));
    let _ = writeln!(s, "certificate   {:?}", r.certificate);
    let _ = writeln!(s, "iterations    {}", r.iterations);
    let _ = writeln!(s, "wall time     {:.3} ms", r.wall_time.as_secs_f64() * 1e3);
    s
}

fn render_json(r: &SolveReport) -> Result<String> {
    let v = serde_json::json!({
        "strategy": r.strategy.to_string(),
        "termination": format!("{:?}", r.termination),
        "x_star": r.x_star.as_slice(),
        "sigma_star": r.sigma_star.as_slice(),
        "p_value": r.p_value,
        "pd_value": r.pd_value,
        "gap": r.gap,
        "certificate": format!("{:?}", r.certificate),
        "iterations": r.iterations,
        "wall_time_ms": r.wall_time.as_secs_f64() * 1e3,
        "sigma0": r.sigma0.as_slice(),
        "x0": r.x0.as_slice(),
    });
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

const RUN_CSV_HEADER: &str = "strategy,termination,p_value,pd_value,gap,certificate,iterations,time_ms,x_star,sigma_star";

fn render_csv(r: &SolveReport) -> String {
    format!(
        "{RUN_CSV_HEADER}\n{},{:?},{},{},{},{:?},{},{},{},{}\n",
        r.strategy,
        r.termination,
        fmt_f64(r.p_value),
        fmt_f64(r.pd_value),
        fmt_f64(r.gap),
        r.certificate,
        r.iterations,
        fmt_f64(r.wall_time.as_secs_f64() * 1e3),
        fmt_vec(&r.x_star, ";"),
        fmt_vec(&r.sigma_star, ";"),
    )
}

fn cmd_run(a: &RunArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let loaded = load_problem(&a.problem)?;
    let s = &a.solve;
    let cfg = strategy_config(
        &loaded.problem,
        loaded.bench,
        &s.strategy,
        s.sigma0.as_deref(),
        s.translate.as_deref(),
        s.penalty,
        s.max_iter,
        seed,
    )?;
    let report = solve(&loaded.problem, &cfg)?;
    let text = match a.format {
        Format::Human => render_human(&report),
        Format::Json => render_json(&report)?,
        Format::Csv => render_csv(&report),
    };
    out.write_all(text.as_bytes())?;
    Ok(if report.converged() { EXIT_OK } else { EXIT_SOLVER })
}

pub const TABLE_CSV_HEADER: &str = "n,p_star,iterations,time_ms,status";

fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad dimension {s:?}"))))
        .collect()
}

/// One CSV row per dimension, in input order. Rows run concurrently; a
/// failing row is marked `FAILED` and the sweep continues.
pub fn table_rows(name: BenchmarkName, dims: &[usize], args: &TableSolveArgs, seed: u64, exec: Execution) -> Vec<(String, bool)> {
    exec.map(dims, |&n| {
        let attempt = || -> Result<SolveReport> {
            let problem = benchmarks::build(name, n)?;
            let cfg = strategy_config(
                &problem,
                Some(name),
                &args.strategy,
                args.sigma0.as_deref(),
                args.translate.as_deref(),
                args.penalty,
                args.max_iter,
                seed,
            )?;
            solve(&problem, &cfg)
        };
        match attempt() {
            Ok(r) => (
                format!(
                    "{n},{},{},{},{:?}",
                    fmt_f64(r.p_value),
                    r.iterations,
                    fmt_f64(r.wall_time.as_secs_f64() * 1e3),
                    r.termination
                ),
                r.converged(),
            ),
            Err(_) => (format!("{n},,,,FAILED"), false),
        }
    })
}

fn cmd_table(a: &TableArgs, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let name: BenchmarkName = a.bench.parse()?;
    if !matches!(name, BenchmarkName::Rosenbrock | BenchmarkName::DixonPrice) {
        return Err(Error::UnsupportedBenchmark(format!("table supports rosenbrock and dixon-price, got {}", a.bench)));
    }
    let mut dims = match &a.dims {
        Some(d) => parse_dims(d)?,
        None => DEFAULT_DIMS.to_vec(),
    };
    if a.full {
        dims.extend(FULL_DIMS.iter().filter(|n| !dims.contains(n)).collect::<Vec<_>>());
    }
    // validate the solve flags once up front so usage errors are not per-row failures
    a.solve.strategy.parse::<Strategy>()?;
    if let Some(t) = &a.solve.translate {
        parse_translation(t, seed)?;
    }
    let rows = table_rows(name, &dims, &a.solve, seed, Execution::default());
    let mut text = String::from(TABLE_CSV_HEADER);
    text.push('\n');
    let mut all_ok = true;
    for (row, ok) in rows {
        text.push_str(&row);
        text.push('\n');
        all_ok &= ok;
    }
    out.write_all(text.as_bytes())?;
    Ok(if all_ok { EXIT_OK } else { EXIT_SOLVER })
}

fn parse_ranges(text: &str, axes: usize) -> Result<Vec<(f64, f64)>> {
    let ranges = text
        .split(',')
        .map(|r| {
            let (lo, hi) = r.split_once(':').ok_or_else(|| Error::Parse(format!("range needs lo:hi, got {r:?}")))?;
            let lo: f64 = lo.trim().parse().map_err(|_| Error::Parse(format!("bad range bound {lo:?}")))?;
            let hi: f64 = hi.trim().parse().map_err(|_| Error::Parse(format!("bad range bound {hi:?}")))?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Parse(format!("range {r:?} must satisfy lo <= hi")));
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    match ranges.len() {
        1 => Ok(vec![ranges[0]; axes]),
        k if k == axes => Ok(ranges),
        k => Err(Error::Parse(format!("expected 1 or {axes} ranges, got {k}"))),
    }
}

fn axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![lo];
    }
    (0..resolution).map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64).collect()
}

/// Row-major samples: the first coordinate varies slowest.
pub fn grid_csv(p: &PolynomialProblem, surface: Surface, ranges: &[(f64, f64)], resolution: usize, exec: Execution) -> Result<String> {
    let axes = match surface {
        Surface::Primal => p.dim(),
        Surface::Dual => p.num_measures(),
    };
    if axes == 0 || axes > 2 {
        return Err(Error::GridTooLarge { dims: axes });
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be at least 1".into()));
    }
    let lines: Vec<Vec<f64>> = ranges.iter().map(|&(lo, hi)| axis(lo, hi, resolution)).collect();
    let total = resolution.pow(axes as u32);
    let point = |idx: usize| -> DVector<f64> {
        let mut v = DVector::zeros(axes);
        let mut rem = idx;
        for a in (0..axes).rev() {
            v[a] = lines[a][rem % resolution];
            rem /= resolution;
        }
        v
    };
    let mut text = String::new();
    let coords: Vec<String> = match surface {
        Surface::Primal => (1..=axes).map(|i| format!("x{i}")).collect(),
        Surface::Dual => (1..=axes).map(|i| format!("sigma{i}")).collect(),
    };
    text.push_str(&coords.join(","));
    match surface {
        Surface::Primal => text.push_str(",p\n"),
        Surface::Dual => {
            let r: Vec<String> = (1..=axes).map(|i| format!("residual{i}")).collect();
            text.push_str(&format!(",pd,classification,{}\n", r.join(",")));
        }
    }
    let rows = exec.map_range(total, |idx| -> Result<String> {
        let v = point(idx);
        let head = fmt_vec(&v, ",");
        match surface {
            Surface::Primal => Ok(format!("{head},{}", fmt_f64(p.eval_primal(&v)?))),
            Surface::Dual => {
                let dp = dual_point(p, &v)?;
                let (pd, r) = dual_value_and_residual(p, &dp);
                Ok(format!("{head},{},{},{}", fmt_f64(pd), classification_label(dp.classification), fmt_vec(&r, ",")))
            }
        }
    });
    for row in rows {
        text.push_str(&row?);
        text.push('\n');
    }
    Ok(text)
}

fn classification_label(c: Classification) -> &'static str {
    match c {
        Classification::InteriorPlus => "InteriorPlus",
        Classification::BoundaryPlus => "BoundaryPlus",
        Classification::FeasibleIndefinite => "FeasibleIndefinite",
        Classification::Infeasible => "Infeasible",
    }
}

fn cmd_grid(a: &GridArgs, out: &mut dyn Write) -> Result<i32> {
    let loaded = load_problem(&a.problem)?;
    let axes = match a.surface {
        Surface::Primal => loaded.problem.dim(),
        Surface::Dual => loaded.problem.num_measures(),
    };
    if axes == 0 || axes > 2 {
        return Err(Error::GridTooLarge { dims: axes });
    }
    let ranges = parse_ranges(&a.range, axes)?;
    let text = grid_csv(&loaded.problem, a.surface, &ranges, a.resolution, Execution::default())?;
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_sdp_export(a: &SdpExportArgs, out: &mut dyn Write) -> Result<i32> {
    let loaded = load_problem(&a.problem)?;
    let inst = build_sdp(&loaded.problem);
    match &a.output {
        Some(path) => {
            let mut file = std::io::BufWriter::new(fs::File::create(path)?);
            export_sdpa(&inst, &mut file)?;
            file.flush()?;
        }
        None => export_sdpa(&inst, out)?,
    }
    Ok(EXIT_OK)
}
