// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vdc_core::graph::GraphKind;
use vdc_core::metrics::NoisePolicy;
use vdc_core::Metric;

/// Varied-density clustering on approximate kNN graphs.
#[derive(Debug, Parser)]
#[command(name = "vdc", version)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "VDC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and save a CEOs index.
    Index(IndexArgs),
    /// Cluster a dataset and write one label per line.
    Cluster(ClusterArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Sweep index and propagation parameters over one dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Fvecs,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// The CSV input starts with a header row.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value = "l2")]
    pub metric: Metric,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel bandwidth for L2/L1 data; defaults to the mean pairwise distance.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Random feature pairs for L2/L1 data (output dimension is twice this).
    #[arg(long)]
    pub dprime: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CeosArgs {
    /// Random directions per bank; defaults to about sqrt(n).
    #[arg(long = "D")]
    pub projections: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub s: usize,
    #[arg(long, default_value_t = 50)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub ceos: CeosArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Exact,
    Ceos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Dnp,
    Lpa,
    Louvain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Stored,
    Topk,
}

#[derive(Debug, Clone, Args)]
pub struct PropagationArgs {
    #[arg(long, default_value = "symmetric")]
    pub graph: GraphKind,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// DNP estimates density with the k/c-th neighbor.
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    /// Explicit k' for DNP; overrides --c.
    #[arg(long)]
    pub kp: Option<usize>,
    /// Candidates scanned by DNP's predecessor check on CEOs neighborhoods.
    #[arg(long, value_enum, default_value_t = Check::Topk)]
    pub check: Check,
    #[arg(long, default_value_t = 100)]
    pub lpa_iters: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub ceos: CeosArgs,
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    pub backend: BackendKind,
    /// Prebuilt index from `vdc index` (same data, metric and kernel flags).
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub prop: PropagationArgs,
    #[arg(long, value_enum, default_value_t = Algo::Dnp)]
    pub algo: Algo,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the kNN graph as `u v distance` lines.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
    /// Ground-truth labels; adds scores to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "own-cluster")]
    pub noise: NoisePolicy,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value = "own-cluster")]
    pub noise: NoisePolicy,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub ceos: CeosArgs,
    #[command(flatten)]
    pub prop: PropagationArgs,
    /// Parameter grid, e.g. "s=10,20;m=25,50;k=8". Keys: D, s, m, k, c, kp.
    #[arg(long)]
    pub sweep: String,
    /// Report recall against brute-force neighbors.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 10)]
    pub recall_k: usize,
    /// Queries sampled for the recall oracle (0 = all points).
    #[arg(long, default_value_t = 1000)]
    pub oracle_queries: usize,
    /// Also cluster every configuration.
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "own-cluster")]
    pub noise: NoisePolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print CSV rows instead of a JSON report.
    #[arg(long)]
    pub csv: bool,
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<vdc_core::Error> for Failure {
    fn from(e: vdc_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| match cli.command {
        Command::Index(a) => commands::index(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench(a) => commands::bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))
}
