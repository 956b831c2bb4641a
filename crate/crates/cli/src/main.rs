mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

/// Densities of wait-first and jump-first Lévy walk limits, and Monte Carlo checks against them.
#[derive(Parser, Debug)]
#[command(name = "levywalk", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One-sided stable density r_alpha on a grid or at given points.
    StablePdf(StablePdfArgs),
    /// Analytic density curve as `x,pdf,err` CSV.
    Density {
        #[command(subcommand)]
        process: DensityProcess,
    },
    /// Simulate the discrete walk and write a histogram or the raw endpoints.
    Simulate(SimulateArgs),
    /// Distances between a histogram and an analytic density.
    Compare(CompareArgs),
    /// Regenerate the reference curves, histograms and comparisons into a directory.
    Repro(ReproArgs),
}

#[derive(Subcommand, Debug)]
enum DensityProcess {
    WaitFirst(DensityArgs),
    JumpFirst(DensityArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessArg {
    WaitFirst,
    JumpFirst,
}

impl From<ProcessArg> for levywalk::curve::Process {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::WaitFirst => levywalk::curve::Process::WaitFirst,
            ProcessArg::JumpFirst => levywalk::curve::Process::JumpFirst,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StableMethod {
    Auto,
    Series,
    Integral,
}

#[derive(Args, Debug)]
pub struct StablePdfArgs {
    #[arg(long)]
    pub alpha: String,
    /// Evaluation points; repeatable.
    #[arg(long = "x", allow_negative_numbers = true)]
    pub xs: Vec<f64>,
    /// `lo:hi:count` grid, used when no `--x` is given.
    #[arg(long, default_value = "0:5:200")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = StableMethod::Auto)]
    pub method: StableMethod,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Stable index, decimal or `l/k`.
    #[arg(long, visible_alias = "alpha-rational")]
    pub alpha: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `lo:hi:count`; defaults to `(-t, t)` for wait-first and `(-3t, 3t)` for jump-first.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// auto, quadrature, closed-half or meijer.
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub process: ProcessArg,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Steps per trajectory.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 201)]
    pub bins: usize,
    /// Histogram window `lo:hi`; defaults to `[-t, t]` or `[-3t, 3t]`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Write the raw endpoints instead of a histogram.
    #[arg(long)]
    pub endpoints: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Histogram CSV written by `simulate`.
    #[arg(long)]
    pub histogram: PathBuf,
    /// Analytic curve (`x,pdf,err`) or histogram CSV to compare against.
    #[arg(long, conflicts_with_all = ["alpha", "p"])]
    pub analytic: Option<PathBuf>,
    /// Process for inline parameters; read from the histogram header when omitted.
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Fail with exit code 1 when the L1 distance exceeds this.
    #[arg(long)]
    pub max_l1: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReproArgs {
    #[arg(long, default_value = "repro")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Skip the Monte Carlo histograms.
    #[arg(long)]
    pub no_simulation: bool,
    /// Skip the Meijer G curves, the slowest part of the run.
    #[arg(long)]
    pub skip_meijer: bool,
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LEVYWALK_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::usage(format!("LEVYWALK_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::other(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::StablePdf(a) => commands::stable_pdf(&a),
        Command::Density { process: DensityProcess::WaitFirst(a) } => commands::density(ProcessArg::WaitFirst, &a),
        Command::Density { process: DensityProcess::JumpFirst(a) } => commands::density(ProcessArg::JumpFirst, &a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Repro(a) => commands::repro(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("levywalk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
