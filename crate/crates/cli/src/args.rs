use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lowrank::io::FileFormat;
use lowrank::sketch::SketchKind;

#[derive(Parser, Debug)]
#[command(name = "lowrank", version, about = "Randomized low-rank matrix approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partial singular value decomposition.
    Svd(SvdArgs),
    /// Partial eigendecomposition of a Hermitian matrix.
    Eig(EigArgs),
    /// Column interpolative decomposition.
    Id(RunArgs),
    /// Orthonormal range basis only.
    Range(RunArgs),
    /// Error curves, histograms and bound tables as CSV.
    Experiment(ExperimentArgs),
    /// Operation counts and timings of the sketching paths.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Matrix file (.mtx, .bin or .csv).
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generated input: exact_rank:K, power:ALPHA, exp:RHO, flat:SIGMA:COUNT,
    /// tail:RHO:FLOOR or laplace:NODES. The eig command builds the PSD
    /// matrix U diag(sigma) U^* instead.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Work in complex arithmetic.
    #[arg(long)]
    pub complex: bool,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank k.
    #[arg(long, conflicts_with = "adaptive")]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub oversample: usize,
    /// Power iterations q.
    #[arg(long, default_value_t = 0)]
    pub power: usize,
    #[arg(long, default_value = "gauss")]
    pub sketch: SketchKind,
    /// Fixed-precision mode; requires --tol.
    #[arg(long, requires = "tol")]
    pub adaptive: bool,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Posterior probes r.
    #[arg(long, default_value_t = 10)]
    pub probes: usize,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Random seed; a fresh one is drawn and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep only the leading k terms.
    #[arg(long)]
    pub truncate: bool,
    /// Output directory for factors and manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "binary")]
    pub format: FileFormat,
}

#[derive(Args, Debug, Clone)]
pub struct SvdArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Postprocess by row extraction instead of the direct method.
    #[arg(long, conflicts_with = "single_pass")]
    pub row_extraction: bool,
    /// Build the factorization from one sketch of A and one of A^*.
    #[arg(long)]
    pub single_pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EigMethod {
    Direct,
    Row,
    Nystrom,
}

#[derive(Args, Debug, Clone)]
pub struct EigArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: EigMethod,
    /// Build the factorization from a single sketch.
    #[arg(long)]
    pub single_pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ErrorCurve,
    ErrorHist,
    PowerCurve,
    Bounds,
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest basis size for error-curve.
    #[arg(long, default_value_t = 150)]
    pub max_ell: usize,
    /// Sample count for error-hist and power-curve.
    #[arg(long, default_value_t = 25)]
    pub ell: usize,
    #[arg(long, default_value_t = 10)]
    pub rank: usize,
    #[arg(long, default_value_t = 5)]
    pub oversample: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Largest power q for power-curve and bounds.
    #[arg(long, default_value_t = 3)]
    pub q_max: usize,
    #[arg(long, default_value_t = 10)]
    pub probes: usize,
    /// Sketch kinds for error-hist.
    #[arg(long, value_delimiter = ',', default_value = "gauss,ortho,srft,gsrft")]
    pub kinds: Vec<SketchKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "128,256")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub ells: Vec<usize>,
    /// Skip the full SVD timing.
    #[arg(long)]
    pub no_full_svd: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
