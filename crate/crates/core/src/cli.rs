//! Command-line front end. Each `cmd_*` function is usable as a library
//! call and returns a serializable report; [`main_with`] wires them to
//! argument parsing, output files and exit codes.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, LoadError, SimError};
use crate::format::{self, load_problem};
use crate::latency::{analytic_latency, worst_case_latency, LatencyBreakdown};
use crate::parallel::{parallel_unit_trace, ParallelEngine};
use crate::problem::{random_problem, BitWidth, GemmProblem, Matrix};
use crate::profiler::{estimate_workload_latency, profile_paths, LatencySummary, WorkloadStats};
use crate::serial::{serial_step_trace, SerialEngine};
use crate::sim::{ActivityStats, InjectedFault, OutputWidthPolicy, SimConfig, Variant};
use crate::trace::{parallel_trace_csv, serial_trace_csv};
use crate::verify::{minimize, run_verify, VerifyConfig, VerifySummary};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "TUGEMM_SEED";

pub mod exit {
    pub const OK: i32 = 0;
    pub const MISMATCH: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const SIMULATION: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantSel {
    Serial,
    Parallel,
    Both,
}

impl VariantSel {
    pub fn variants(self) -> &'static [Variant] {
        match self {
            VariantSel::Serial => &[Variant::Serial],
            VariantSel::Parallel => &[Variant::Parallel],
            VariantSel::Both => &[Variant::Serial, Variant::Parallel],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemSource {
    Input(PathBuf),
    Seed(u64),
}

/// Fully resolved `simulate` configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub variant: VariantSel,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub w: u32,
    pub source: ProblemSource,
    pub policy: OutputWidthPolicy,
    #[serde(skip)]
    pub trace: Option<PathBuf>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub y: Matrix,
    pub cycles: u64,
    pub activity: ActivityStats,
    pub latency_breakdown: LatencyBreakdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: RunConfig,
    pub results: Vec<VariantReport>,
}

fn resolve_problem(cfg: &RunConfig) -> Result<GemmProblem, Error> {
    match &cfg.source {
        ProblemSource::Input(path) => Ok(load_problem(path)?),
        ProblemSource::Seed(seed) => {
            let width = BitWidth::new(cfg.w)?;
            Ok(random_problem(cfg.m, cfg.n, cfg.p, width, *seed)?)
        }
    }
}

fn simulate_variant(
    p: &GemmProblem,
    variant: Variant,
    config: SimConfig,
    trace_dir: Option<&Path>,
) -> Result<VariantReport, Error> {
    let result = match (variant, trace_dir) {
        (Variant::Serial, None) => SerialEngine::new(p, config)?.run()?,
        (Variant::Parallel, None) => ParallelEngine::new(p, config)?.run()?,
        (v, Some(dir)) => {
            let path = dir.join(format!("{v}_trace.csv"));
            let file = BufWriter::new(create(&path)?);
            match v {
                Variant::Serial => serial_trace_csv(p, config, file)?,
                Variant::Parallel => parallel_trace_csv(p, config, file)?,
            }
        }
    };
    let latency_breakdown = match variant {
        Variant::Serial => serial_step_trace(p)?,
        Variant::Parallel => parallel_unit_trace(p)?,
    };
    Ok(VariantReport {
        variant,
        y: result.y,
        cycles: result.cycles,
        activity: result.activity,
        latency_breakdown,
    })
}

fn create(path: &Path) -> Result<File, Error> {
    File::create(path).map_err(|source| {
        LoadError::Io {
            path: path.to_owned(),
            source,
        }
        .into()
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateReport, Error> {
    let problem = resolve_problem(cfg)?;
    let mut config = cfg.clone();
    config.m = problem.m();
    config.n = problem.n();
    config.p = problem.p();
    config.w = problem.width.bits();
    if let Some(dir) = &cfg.trace {
        fs::create_dir_all(dir)?;
    }
    let sim_config = SimConfig::from(cfg.policy);
    let results = cfg
        .variant
        .variants()
        .iter()
        .map(|&v| simulate_variant(&problem, v, sim_config, cfg.trace.as_deref()))
        .collect::<Result<_, _>>()?;
    Ok(SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReportConfig {
    pub trials: usize,
    pub max_dim: usize,
    pub widths: Vec<BitWidth>,
    pub seed: u64,
    pub large_trials: usize,
    pub large_dim: usize,
    pub large_width: BitWidth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<InjectedFault>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: VerifyReportConfig,
    pub summary: VerifySummary,
    /// Where the minimized reproducer of the first failure was written.
    pub reproducer: Option<PathBuf>,
}

pub fn cmd_verify(cfg: &VerifyConfig, reproducer: Option<&Path>) -> Result<VerifyReport, Error> {
    let summary = run_verify(cfg);
    let mut written = None;
    if let (Some(first), Some(path)) = (summary.failures.first(), reproducer) {
        let small = minimize(&first.trial.problem(), cfg.fault);
        fs::write(path, format::to_text(&small)).map_err(|source| LoadError::Io {
            path: path.to_owned(),
            source,
        })?;
        written = Some(path.to_owned());
    }
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        config: VerifyReportConfig {
            trials: cfg.trials,
            max_dim: cfg.max_dim,
            widths: cfg.widths.clone(),
            seed: cfg.seed,
            large_trials: cfg.large_trials,
            large_dim: cfg.large_dim,
            large_width: cfg.large_width,
            fault: cfg.fault,
        },
        summary,
        reproducer: written,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LatencyReport {
    WorstCase {
        schema_version: u32,
        n: usize,
        w: u32,
        serial: u64,
        parallel: u64,
    },
    Problem {
        schema_version: u32,
        input: PathBuf,
        breakdown: LatencyBreakdown,
    },
}

impl LatencyReport {
    pub fn to_table(&self) -> String {
        match self {
            LatencyReport::WorstCase {
                n, w, serial, parallel, ..
            } => format!(
                "worst-case latency (N={n}, w={w})\nvariant   cycles\nserial    {serial}\nparallel  {parallel}\n"
            ),
            LatencyReport::Problem { breakdown, .. } => {
                let mut s = String::from("step  cycles\n");
                for (i, l) in breakdown.per_step.iter().enumerate() {
                    s.push_str(&format!("{i:<5} {l}\n"));
                }
                s.push_str(&format!(
                    "serial total    {}\nparallel total  {}\n",
                    breakdown.serial_total, breakdown.parallel_total
                ));
                s
            }
        }
    }
}

pub fn cmd_latency_worst_case(n: usize, w: BitWidth) -> LatencyReport {
    LatencyReport::WorstCase {
        schema_version: SCHEMA_VERSION,
        n,
        w: w.bits(),
        serial: worst_case_latency(n, w, Variant::Serial),
        parallel: worst_case_latency(n, w, Variant::Parallel),
    }
}

pub fn cmd_latency_problem(path: &Path) -> Result<LatencyReport, Error> {
    let problem = load_problem(path)?;
    Ok(LatencyReport::Problem {
        schema_version: SCHEMA_VERSION,
        input: path.to_owned(),
        breakdown: analytic_latency(&problem)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub n_operations: u64,
    pub mean_max: f64,
    pub summaries: Vec<LatencySummary>,
    #[serde(skip)]
    pub stats: WorkloadStats,
}

pub fn cmd_profile(paths: &[PathBuf], w: BitWidth, n: usize, variant: VariantSel) -> Result<ProfileReport, Error> {
    let stats = profile_paths(paths, w)?;
    let summaries = variant
        .variants()
        .iter()
        .map(|&v| estimate_workload_latency(&stats, n, v))
        .collect();
    Ok(ProfileReport {
        schema_version: SCHEMA_VERSION,
        command: "profile",
        inputs: paths.to_vec(),
        n_operations: stats.n_operations,
        mean_max: stats.mean_max(),
        summaries,
        stats,
    })
}

#[derive(Debug, Parser)]
#[command(name = "tugemm", version, about = "Temporal-unary GEMM simulator and latency model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one problem on the serial and/or parallel design.
    Simulate(SimulateArgs),
    /// Randomized equivalence check of both engines against the oracle.
    Verify(VerifyArgs),
    /// Worst-case latency table, or the per-step breakdown of a problem file.
    Latency(LatencyArgs),
    /// Profile per-operation maxima of tensor dumps / problem files.
    Profile(ProfileArgs),
    /// Write a random problem in text or JSON format.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct DimArgs {
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    w: u32,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = VariantSel::Both)]
    variant: VariantSel,
    /// Problem file (text or JSON).
    #[arg(long, conflicts_with = "seed")]
    input: Option<PathBuf>,
    /// Seed for a random problem; falls back to $TUGEMM_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    dims: DimArgs,
    /// Fixed output register width in bits (default: unbounded).
    #[arg(long)]
    output_bits: Option<u32>,
    /// Directory receiving per-cycle CSV traces.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 8)]
    max_dim: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4, 8])]
    widths: Vec<u32>,
    /// Falls back to $TUGEMM_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Additional 16x16x16 trials at w=8.
    #[arg(long, default_value_t = 100)]
    large_trials: usize,
    /// Minimized reproducer of the first failure is written here.
    #[arg(long, default_value = "tugemm-reproducer.txt")]
    reproducer: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<InjectedFault>,
}

#[derive(Debug, Args)]
struct LatencyArgs {
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    #[arg(long, default_value_t = 8)]
    w: u32,
    #[arg(long, conflicts_with = "n")]
    input: Option<PathBuf>,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long, default_value_t = 8)]
    w: u32,
    /// Inner dimension used for the latency estimate.
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_enum, default_value_t = VariantSel::Both)]
    variant: VariantSel,
    /// Histogram/CDF CSV destination (default: stdout, before the summary).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    dims: DimArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ProblemFormat::Text)]
    format: ProblemFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn env_seed() -> Result<Option<u64>, Error> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={s:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| {
            LoadError::Io {
                path: path.to_owned(),
                source,
            }
            .into()
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Load(LoadError::Io { .. }) | Error::Io(_) | Error::Csv(_) => exit::IO,
        Error::Load(LoadError::Validation { .. }) => exit::VALIDATION,
        Error::Load(LoadError::Parse { source, .. }) if source.invalid.is_some() => exit::VALIDATION,
        Error::Load(_) => exit::PARSE,
        Error::Validation(_) | Error::Profile(_) | Error::ProfileFile { .. } => exit::VALIDATION,
        Error::Sim(SimError::Validation(_)) => exit::VALIDATION,
        Error::Sim(_) => exit::SIMULATION,
        Error::Usage(_) => exit::USAGE,
    }
}

fn run_simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<i32, Error> {
    let source = match (args.input, args.seed) {
        (Some(path), _) => ProblemSource::Input(path),
        (None, Some(seed)) => ProblemSource::Seed(seed),
        (None, None) => match env_seed()? {
            Some(seed) => ProblemSource::Seed(seed),
            None => return Err(Error::Usage(format!("give --input or --seed (or set {SEED_ENV})"))),
        },
    };
    let policy = args
        .output_bits
        .map_or(OutputWidthPolicy::Unbounded, OutputWidthPolicy::Fixed);
    let cfg = RunConfig {
        variant: args.variant,
        m: args.dims.m,
        n: args.dims.n,
        p: args.dims.p,
        w: args.dims.w,
        source,
        policy,
        trace: args.trace,
        output: args.output,
    };
    let report = cmd_simulate(&cfg)?;
    emit(&json(&report), cfg.output.as_deref(), stdout)?;
    Ok(exit::OK)
}

fn run_verify_cmd(args: VerifyArgs, stdout: &mut dyn Write) -> Result<i32, Error> {
    if args.trials == 0 && args.large_trials == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    let widths = args
        .widths
        .iter()
        .map(|&w| BitWidth::new(w))
        .collect::<Result<Vec<_>, _>>()?;
    if widths.is_empty() {
        return Err(Error::Usage("--widths must name at least one width".into()));
    }
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let cfg = VerifyConfig {
        trials: args.trials,
        max_dim: args.max_dim,
        widths,
        seed,
        large_trials: args.large_trials,
        fault: args.inject_fault,
        ..VerifyConfig::default()
    };
    let report = cmd_verify(&cfg, Some(&args.reproducer))?;
    emit(&json(&report), args.output.as_deref(), stdout)?;
    Ok(if report.summary.ok() { exit::OK } else { exit::MISMATCH })
}

fn run_latency(args: LatencyArgs, stdout: &mut dyn Write) -> Result<i32, Error> {
    let report = match (args.input, args.n) {
        (Some(path), _) => cmd_latency_problem(&path)?,
        (None, Some(n)) if n >= 1 => cmd_latency_worst_case(n, BitWidth::new(args.w)?),
        _ => return Err(Error::Usage("--n must be at least 1".into())),
    };
    let text = if args.json { json(&report) } else { report.to_table() };
    stdout.write_all(text.as_bytes())?;
    Ok(exit::OK)
}

fn run_profile(args: ProfileArgs, stdout: &mut dyn Write) -> Result<i32, Error> {
    if args.n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let report = cmd_profile(&args.paths, BitWidth::new(args.w)?, args.n, args.variant)?;
    match &args.csv {
        Some(path) => report.stats.write_csv(BufWriter::new(create(path)?))?,
        None => report.stats.write_csv(&mut *stdout)?,
    }
    emit(&json(&report), args.output.as_deref(), stdout)?;
    Ok(exit::OK)
}

fn run_generate(args: GenerateArgs, stdout: &mut dyn Write) -> Result<i32, Error> {
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.ok_or_else(|| Error::Usage(format!("give --seed (or set {SEED_ENV})")))?,
    };
    let p = random_problem(args.dims.m, args.dims.n, args.dims.p, BitWidth::new(args.dims.w)?, seed)?;
    let mut text = match args.format {
        ProblemFormat::Text => format::to_text(&p),
        ProblemFormat::Json => format::to_json(&p),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(&text, args.output.as_deref(), stdout)?;
    Ok(exit::OK)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors are reported on `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a, stdout),
        Command::Verify(a) => run_verify_cmd(a, stdout),
        Command::Latency(a) => run_latency(a, stdout),
        Command::Profile(a) => run_profile(a, stdout),
        Command::Generate(a) => run_generate(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
