//! `tensor-attain`: command-line front end.
//!
//! Every subcommand prints one JSON document to stdout (or `--output`). On
//! failure the process exits nonzero and prints `{"error", "message"}` to
//! stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensor_attain::solvers::SolveOptions;

/// The only environment variable read: size of the worker pool.
pub const THREADS_ENV: &str = "TENSOR_ATTAIN_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tensor_attain::Error),
    #[error("{THREADS_ENV} must be a positive integer, got {0:?}")]
    Threads(String),
    #[error("{0}")]
    Usage(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Threads(_) => "invalid_environment",
            CliError::Usage(_) => "usage",
            CliError::Pool(_) => "thread_pool",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tensor-attain",
    version,
    about = "Tensor approximation over R and C with attainment diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point, tangent, sufficient condition and difference-quotient limit
    /// of a tangent witness.
    Witness(WitnessArgs),
    /// Hyperdeterminant and real/complex/border rank of a 2x2x2 tensor.
    Rank2x2x2(InputArgs),
    /// Best rank-r approximation (optionally symmetric or over C).
    Approx(ApproxArgs),
    /// Rank-r completion from observed entries.
    Complete(CompleteArgs),
    /// Sparse plus low rank approximation.
    Splr(SplrArgs),
    /// Block-term approximation with bounded multilinear ranks.
    Blockterm(BlockTermArgs),
    /// Seeded Monte Carlo experiment writing report.json and results.csv.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tensor JSON file, `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dsl {
    /// `w⊗v⊗v + v⊗w⊗v + v⊗v⊗w`, the tangent to the Segre curve
    /// `(v + t w)^{⊗3}`: rank 3, border rank 2.
    Tangent,
    /// Real rank 3, complex rank 2; not a tangent, so only the
    /// certificate is reported.
    Open,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct WitnessSource {
    /// Witness JSON file, `-` for stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in 2x2x2 witness with v = e1, w = e2.
    #[arg(long, value_enum)]
    pub dsl: Option<Dsl>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub source: WitnessSource,
    /// Step sizes for the difference quotient.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
    pub t: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolveOptions::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = SolveOptions::default().tol_rel_change)]
    pub tol_rel_change: f64,
    #[arg(long, default_value_t = SolveOptions::default().tol_residual)]
    pub tol_residual: f64,
    #[arg(long, default_value_t = SolveOptions::default().kappa_threshold)]
    pub kappa_threshold: f64,
    #[arg(long, default_value_t = SolveOptions::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = SolveOptions::default().seed)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn options(&self) -> tensor_attain::Result<SolveOptions> {
        let opts = SolveOptions {
            max_iter: self.max_iter,
            tol_rel_change: self.tol_rel_change,
            tol_residual: self.tol_residual,
            kappa_threshold: self.kappa_threshold,
            restarts: self.restarts,
            seed: self.seed,
            ..SolveOptions::default()
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub rank: usize,
    /// Restrict to sums of symmetric rank-one terms.
    #[arg(long)]
    pub symmetric: bool,
    /// Promote a real input to C before solving.
    #[arg(long)]
    pub complex: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Observed entries: `{"indices": [[i1, ..., id], ...]}`, 1-based.
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "support")]
pub struct SupportArgs {
    /// Known support of the sparse part, same format as a mask.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// At most this many nonzero entries, placed freely.
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SplrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub rank: usize,
    #[command(flatten)]
    pub support: SupportArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BlockTermArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Multilinear ranks, blocks separated by `;`, e.g. `2,2,2;2,2,2`.
    #[arg(long)]
    pub blocks: String,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Threads(raw.clone()))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Pool(e.to_string()))
}

fn fail(err: &CliError) -> ExitCode {
    let body = serde_json::json!({ "error": err.kind(), "message": err.to_string() });
    eprintln!("{body}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(&CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ))
        }
    };
    match configure_threads().and_then(|()| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
