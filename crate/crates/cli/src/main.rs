//! `sigmafrac`: evaluate, compare, and verify sigmoidal fractional derivatives.

mod commands;
mod functions;
mod settings;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sigmafrac::FracError;

use settings::{ConventionArg, FileConfig, Settings, QUAD_TOL_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "sigmafrac",
    version,
    about = "Sigmoidal fractional derivatives: evaluation, comparison, and verification"
)]
struct Cli {
    /// TOML file with `seed`, `convention`, and a `[quad]` table
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Quadrature abs/rel tolerance; overrides the environment and config file
    #[arg(long, global = true)]
    quad_tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one fractional derivative
    Deriv(DerivArgs),
    /// Evaluate every kernel family on the same input (CSV)
    Compare(CompareArgs),
    /// Memory lengths for the sigmoidal and Caputo derivatives (CSV)
    Memory(MemoryArgs),
    /// Laplace and Fourier multipliers against quadrature (CSV)
    TransformVerify(TransformArgs),
    /// Fractional gradient descent run with trace CSV and JSON summary
    Optimize(OptimizeArgs),
    /// Claimed-solution residual or Picard solve for fractional differential problems
    Fde(FdeArgs),
    /// Run every theorem check and write a JSON report
    TheoremSuite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Sigmoidal,
    Caputo,
    CaputoFabrizio,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CfPrefactorArg {
    /// M(α)/(1−α)
    OneMinusAlpha,
    /// M(α)/Γ(1−α)
    Gamma,
}

#[derive(Debug, Args)]
struct KernelOpts {
    /// Caputo–Fabrizio normalization M(α)
    #[arg(long, default_value_t = 1.0)]
    m_alpha: f64,
    #[arg(long, value_enum, default_value = "one-minus-alpha")]
    cf_prefactor: CfPrefactorArg,
    /// Gaussian width; defaults to (1−α)/√2
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Debug, Args)]
struct DerivArgs {
    #[arg(long, value_enum, default_value = "sigmoidal")]
    kernel: KernelArg,
    #[arg(long)]
    alpha: f64,
    /// Lower limit; defaults to 0, or to the first node of a CSV grid
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    t: f64,
    /// Named function (constant, linear, quadratic-shift, sin, exp, abs-smooth) or CSV grid path
    #[arg(long)]
    f: String,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[command(flatten)]
    kernel_opts: KernelOpts,
    /// Print a JSON report instead of key-value lines
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// One or more orders, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    f: String,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[command(flatten)]
    kernel_opts: KernelOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MemoryArgs {
    #[arg(long)]
    eps: f64,
    /// Bound on |f'|
    #[arg(long)]
    c0: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Caputo bound M; defaults to c0
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Laplace points, comma separated
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    /// Fourier frequencies, comma separated
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Objective {
    /// (t − 2)²
    Quadratic,
    /// ½(t − 3)² + λ|t|
    LassoToy,
    /// (1 − t)² + 100(t² − t)²
    #[value(name = "rosenbrock-1d")]
    Rosenbrock1d,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, value_enum)]
    objective: Objective,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    t0: f64,
    /// History point t₋₁; defaults to t0 − 0.1·max(1, |t0|)
    #[arg(long)]
    t_prev: Option<f64>,
    /// ℓ1 weight (lasso-toy defaults to 0.5)
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = sigmafrac::l1reg::DEFAULT_L1_A)]
    l1_a: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long)]
    step_tol: Option<f64>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Trace CSV path
    #[arg(long)]
    trace: Option<PathBuf>,
    /// JSON summary path; stdout when omitted
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FdeProblem {
    /// Residual of the claimed closed-form solution of D^α f = ∫ g
    #[value(name = "2.9")]
    ClaimedSolution,
    /// Picard solve of D^α f = rhs(t, f, D^α f)
    #[value(name = "2.10")]
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RhsArg {
    /// rhs = 0
    Zero,
    /// rhs = w(t), the operator image of (t − a)²
    Manufactured,
    /// rhs = c0·(f − f̂(t)) + w(t) with f̂ = (t − a)² + f0
    LinearF,
}

#[derive(Debug, Args)]
struct FdeArgs {
    #[arg(long, value_enum)]
    thm: FdeProblem,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    /// Named g for the claimed-solution check
    #[arg(long, default_value = "linear")]
    g: String,
    #[arg(long, default_value_t = 0.0)]
    f0: f64,
    #[arg(long, value_enum, default_value = "linear-f")]
    rhs: RhsArg,
    /// Lipschitz constant of rhs
    #[arg(long, default_value_t = 0.1)]
    c0: f64,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Solution CSV (t, f, u)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report path; stdout when omitted
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteConvention {
    #[value(alias = "full-mass")]
    Full,
    #[value(alias = "paper-half-mass")]
    Paper,
    Both,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Theorem ids to run, comma separated
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, value_enum)]
    convention: Option<SuiteConvention>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path; stdout when omitted
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Crash(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Crash(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Crash(m) => m,
        }
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        match e {
            FracError::Singularity
            | FracError::NonConvergence { .. }
            | FracError::OrderingViolation(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let env_tol = std::env::var(QUAD_TOL_ENV).ok();
    let settings = Settings::resolve(&file, env_tol.as_deref(), cli.quad_tol)?;
    match cli.command {
        Command::Deriv(a) => commands::deriv(&a, &settings),
        Command::Compare(a) => commands::compare(&a, &settings),
        Command::Memory(a) => commands::memory(&a, &settings),
        Command::TransformVerify(a) => commands::transform_verify(&a, &settings),
        Command::Optimize(a) => commands::optimize(&a, &settings),
        Command::Fde(a) => commands::fde(&a, &settings),
        Command::TheoremSuite(a) => commands::theorem_suite(&a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(cli))).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(CliError::Crash(format!("internal error: {msg}")))
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sigmafrac: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
