use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Analysis toolkit for finite-state nonlinear (law-dependent) Markov
/// chains: contraction coefficients, invariant measures, convergence-rate
/// audits, and mean-field particle simulation.
#[derive(Debug, Parser)]
#[command(name = "nlmc", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the kernel invariants and list every violation.
    Validate(ValidateArgs),
    /// One-step (exact) and multi-step (bracketed) contraction
    /// coefficients, plus the regime classification.
    Analyze(AnalyzeArgs),
    /// Iterate the law and emit the trajectory.
    Iterate(IterateArgs),
    /// Solve for the invariant measure with a multi-start uniqueness probe.
    Invariant(InvariantArgs),
    /// Audit observed convergence against the certified two-step bounds.
    Audit(AuditArgs),
    /// Mean-field particle simulation: empirical-law error against the
    /// exact trajectory over a range of ensemble sizes.
    Simulate(SimulateArgs),
    /// Emit a built-in example chain as a kernel spec file.
    Examples(ExamplesArgs),
}

/// Where the kernel comes from: a built-in example or a spec file.
#[derive(Debug, Args, Clone)]
pub struct KernelSource {
    /// Built-in example chain (example1 or example2); requires --gamma.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,

    /// Coupling strength for the built-in chains
    /// (example1: 0 < gamma < 0.25, example2: 0 < gamma < 0.5).
    #[arg(long, value_name = "REAL")]
    pub gamma: Option<f64>,

    /// Kernel spec file (JSON).
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Artifact format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Grid-search parameters for the bracketed multi-step coefficients.
#[derive(Debug, Args, Clone)]
pub struct SearchArgs {
    /// Simplex grid denominator for both laws.
    #[arg(long = "grid", value_name = "INT", default_value_t = 20)]
    pub grid: u32,

    /// Smallest refinement move.
    #[arg(long = "min-step", value_name = "REAL", default_value_t = 1e-6)]
    pub min_step: f64,

    /// Law pairs closer than this in TV are excluded from the ratio search.
    #[arg(long = "pair-floor", value_name = "REAL", default_value_t = 1e-9)]
    pub pair_floor: f64,

    /// Cap on the number of grid pair evaluations.
    #[arg(long = "eval-cap", value_name = "INT", default_value_t = 10_000_000)]
    pub eval_cap: u64,
}

impl SearchArgs {
    pub fn to_config(&self) -> nlmc::contraction::SearchConfig {
        nlmc::contraction::SearchConfig {
            denominator: self.grid,
            min_step: self.min_step,
            pair_floor: self.pair_floor,
            eval_cap: self.eval_cap,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: KernelSource,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: KernelSource,

    /// Step count of the multi-step analysis; 1 skips the bracketed search.
    #[arg(long, value_name = "INT", default_value_t = 2)]
    pub steps: u32,

    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub source: KernelSource,

    /// Number of law updates (trajectory length steps + 1).
    #[arg(long, value_name = "INT", default_value_t = 40)]
    pub steps: usize,

    /// Initial law: "uniform", "vertex:<i>" (1-based), or comma weights.
    #[arg(long, value_name = "LAW", default_value = "vertex:1")]
    pub mu0: String,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartsChoice {
    /// Every vertex plus the uniform law (the default uniqueness probe).
    Vertices,
    /// The uniform law only.
    Uniform,
    /// Laws listed in --starts-file (JSON array of weight arrays).
    File,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    #[command(flatten)]
    pub source: KernelSource,

    /// Start set for the fixed-point iteration.
    #[arg(long, value_enum, default_value_t = StartsChoice::Vertices)]
    pub starts: StartsChoice,

    /// JSON file with explicit starts (used with --starts file).
    #[arg(long, value_name = "PATH")]
    pub starts_file: Option<PathBuf>,

    /// Per-step TV tolerance for convergence.
    #[arg(long, value_name = "REAL", default_value_t = 1e-13)]
    pub tol: f64,

    /// Iteration budget per start.
    #[arg(long = "max-iters", value_name = "INT", default_value_t = 200_000)]
    pub max_iters: usize,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub source: KernelSource,

    /// Audit steps n = 0..=steps.
    #[arg(long, value_name = "INT", default_value_t = 40)]
    pub steps: usize,

    /// Initial law: "uniform", "vertex:<i>" (1-based), or comma weights.
    #[arg(long, value_name = "LAW", default_value = "vertex:1")]
    pub mu0: String,

    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: KernelSource,

    /// Ensemble sizes, comma-separated (e.g. 100,1000,10000).
    #[arg(long, value_name = "LIST", default_value = "100,1000,10000")]
    pub particles: String,

    /// Steps to advance each ensemble.
    #[arg(long, value_name = "INT", default_value_t = 30)]
    pub steps: usize,

    /// Independent replicas per ensemble size.
    #[arg(long, value_name = "INT", default_value_t = 20)]
    pub replicas: usize,

    /// Master seed; replica streams are split from it deterministically.
    #[arg(long, value_name = "U64", default_value_t = 42)]
    pub seed: u64,

    /// Initial law: "uniform", "vertex:<i>" (1-based), or comma weights.
    #[arg(long, value_name = "LAW", default_value = "vertex:1")]
    pub mu0: String,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    /// Which built-in chain to emit (example1 or example2).
    #[arg(long, value_name = "NAME")]
    pub builtin: String,

    /// Coupling strength to bake into the emitted spec.
    #[arg(long, value_name = "REAL")]
    pub gamma: f64,

    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
