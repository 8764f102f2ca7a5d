use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hopewave", version, about = "Wavelet structural encodings for graphs")]
pub struct Cli {
    /// Worker threads; 1 reproduces multi-threaded output exactly.
    #[arg(long, global = true, env = "HOPEWAVE_THREADS")]
    pub threads: Option<usize>,

    /// TOML file whose keys fill in flags not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus as JSONL.
    Gen(GenArgs),
    /// Dump the wavelet tensor of one graph.
    Wavelet(WaveletArgs),
    /// Pretrain the autoencoder and write a checkpoint.
    Pretrain(PretrainArgs),
    /// Reconstruction accuracy of a checkpoint on a corpus.
    Eval(EvalArgs),
    /// Per-node structural encodings of one graph as CSV.
    Encode(EncodeArgs),
    /// Accuracy as a function of the number of wavelet channels.
    AblateChannels(AblateChannelsArgs),
    /// Masked vs unmasked training on the same corpus.
    AblateMask(AblateMaskArgs),
    /// Train on each corpus, evaluate hop-1 accuracy on every corpus.
    CrossEval(CrossEvalArgs),
    /// Run the fast equivariance, mask-balance and gradient checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    ErdosRenyi,
    Cycle,
    Path,
    Grid,
    Tree,
    Barbell,
    /// Round-robin over `--families` with sizes in `[--n-min, --n-max]`.
    Mix,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Node count (erdos-renyi, cycle, path, tree; barbell total size).
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Edge probability for erdos-renyi.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, default_value_t = 4)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    /// Retry erdos-renyi samples until connected.
    #[arg(long)]
    pub connected: bool,
    #[arg(long, value_delimiter = ',', default_value = "cycle,grid,tree,erdos_renyi")]
    pub families: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub n_min: usize,
    #[arg(long, default_value_t = 32)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    /// One `channel_<j>.csv` per scale inside the `--out` directory.
    Csv,
    /// A single JSON document.
    Json,
}

/// Where a single graph comes from.
#[derive(Debug, Args)]
pub struct GraphSource {
    /// Edge-list file (`n m` header, then `u v` lines).
    #[arg(long, conflicts_with = "corpus")]
    pub graph: Option<PathBuf>,
    /// JSONL corpus; pick a graph with `--index`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct WaveletArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,16")]
    pub scales: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Chebyshev)]
    pub method: Method,
    /// Chebyshev order.
    #[arg(long, default_value_t = 50)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = DumpFormat::Json)]
    pub format: DumpFormat,
    #[arg(long)]
    pub out: PathBuf,
}

/// Model, wavelet and optimizer settings shared by every training command.
#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,16")]
    pub scales: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
    pub hops: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub latent: usize,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub encoder_widths: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pub latent_hidden: usize,
    #[arg(long, value_delimiter = ',', default_value = "32,16,8")]
    pub decoder_widths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "32,32")]
    pub head_widths: Vec<usize>,
    /// Mask threshold T: kept entries per class and hop.
    #[arg(long, default_value_t = 100)]
    pub threshold: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.0005)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = Method::Chebyshev)]
    pub method: Method,
    #[arg(long, default_value_t = 50)]
    pub order: usize,
    /// Fraction of the corpus held out for validation.
    #[arg(long, default_value_t = 0.1)]
    pub valid_fraction: f64,
    /// Sample one mask per graph instead of one per epoch.
    #[arg(long)]
    pub fixed_masks: bool,
    /// Train on every entry (masking disabled).
    #[arg(long)]
    pub no_mask: bool,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss and accuracy history as CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskModeArg {
    Masked,
    Unmasked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    All,
    Train,
    Valid,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Hops to score; defaults to every hop of the checkpoint.
    #[arg(long, value_delimiter = ',')]
    pub hops: Vec<usize>,
    #[arg(long, value_enum, default_value_t = MaskModeArg::Masked)]
    pub mask_mode: MaskModeArg,
    /// Mask threshold; defaults to the checkpoint's training threshold.
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Which part of the corpus to score, split with `--valid-fraction` and `--split-seed`.
    #[arg(long, value_enum, default_value_t = Split::All)]
    pub split: Split,
    #[arg(long, default_value_t = 0.1)]
    pub valid_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateChannelsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub scale_min: f64,
    #[arg(long, default_value_t = 16.0)]
    pub scale_max: f64,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateMaskArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CrossEvalArgs {
    /// `name=path.jsonl`, repeated or comma-separated; at least two.
    #[arg(long = "corpus", value_delimiter = ',', required = true)]
    pub corpora: Vec<String>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
