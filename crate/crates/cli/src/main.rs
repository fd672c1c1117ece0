//! `mvdfq`: quantize multivariate sequences, build string-kernel Gram
//! matrices, train and evaluate kernel SVMs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "mvdfq", version, about = "Multivariate DFQ string kernels and kernel SVMs")]
struct Cli {
    /// Worker threads for Gram computation (defaults to all cores; never
    /// changes results).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a per-dimension quantizer on a dataset.
    FitQuantizer(FitQuantizerArgs),
    /// Fit a vector-quantization codebook on a dataset.
    FitCodebook(FitCodebookArgs),
    /// Turn real-valued sequences into symbol rows with a fitted quantizer or codebook.
    Discretize(DiscretizeArgs),
    /// Gram matrix of a discretized dataset.
    Gram(GramArgs),
    /// Kernel values between a test set (rows) and a training set (columns).
    CrossGram(CrossGramArgs),
    /// Train one-vs-rest SVMs on a precomputed Gram matrix.
    Train(TrainArgs),
    /// Predict labels from a cross-Gram matrix.
    Predict(PredictArgs),
    /// Cross-validate the full pipeline.
    Cv(CvArgs),
    /// ROC50 of a score table.
    EvalRoc50(EvalRoc50Args),
    /// Write a synthetic AR(1) dataset (see `synth --help`).
    Synth(SynthArgs),
    /// Run the built-in consistency checks.
    Selftest(SelftestArgs),
}

/// Real-valued input: a manifest of CSV files, or FASTA plus a labels file.
#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// TSV manifest `id<TAB>label<TAB>group<TAB>path`.
    #[arg(long, conflicts_with = "fasta", required_unless_present = "fasta")]
    manifest: Option<PathBuf>,
    /// Protein FASTA file; residues become BLOSUM62 rows (R = 20).
    #[arg(long, requires = "labels")]
    fasta: Option<PathBuf>,
    /// `id<TAB>label[<TAB>group]` file for `--fasta`.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum QuantizerArg {
    Uniform,
    Kmeans,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KernelArg {
    Spectrum,
    Mismatch,
    Sssk,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RepresentationArg {
    Dfq,
    Vq,
}

#[derive(Args, Debug, Clone)]
struct QuantArgs {
    /// Bins per dimension.
    #[arg(long, default_value_t = mvdfq_core::quantize::DEFAULT_BINS)]
    bins: u32,
    #[arg(long, value_enum, default_value_t = QuantizerArg::Uniform)]
    quantizer: QuantizerArg,
    /// Lloyd iteration cap for k-means fitting.
    #[arg(long, default_value_t = mvdfq_core::learn::cv::DEFAULT_KMEANS_ITER)]
    kmeans_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelArg::Mismatch)]
    kernel: KernelArg,
    /// k-mer length (spectrum, mismatch).
    #[arg(long, default_value_t = mvdfq_core::kernels::DEFAULT_K)]
    k: usize,
    /// Mismatches allowed (mismatch).
    #[arg(long, default_value_t = mvdfq_core::kernels::DEFAULT_M)]
    m: usize,
    /// Samples per feature, 2 or 3 (sssk).
    #[arg(long, default_value_t = mvdfq_core::kernels::DEFAULT_SSSK_T)]
    t: usize,
    /// Maximum gap between samples (sssk).
    #[arg(long, default_value_t = mvdfq_core::kernels::DEFAULT_SSSK_D)]
    d: usize,
    /// Apply the multinomial-manifold embedding to every row.
    #[arg(long)]
    manifold: bool,
    /// Cosine-normalize kernel values.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug, Clone)]
struct SvmArgs {
    /// Soft-margin penalty.
    #[arg(long = "C", default_value_t = mvdfq_core::learn::svm::DEFAULT_C)]
    c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    #[arg(long, default_value_t = mvdfq_core::learn::svm::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct FitQuantizerArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    quant: QuantArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitCodebookArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of codewords.
    #[arg(long, default_value_t = mvdfq_core::quantize::vq::DEFAULT_CODEBOOK_SIZE)]
    codebook_size: usize,
    #[arg(long, default_value_t = mvdfq_core::learn::cv::DEFAULT_KMEANS_ITER)]
    kmeans_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Quantizer or codebook file from `fit-quantizer` / `fit-codebook`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GramArgs {
    /// Discretized dataset from `discretize`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CrossGramArgs {
    /// Discretized test sequences (matrix rows).
    #[arg(long)]
    input: PathBuf,
    /// Discretized training sequences (matrix columns).
    #[arg(long)]
    train: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    gram: PathBuf,
    /// Discretized training set supplying the label of every Gram id.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    cross_gram: PathBuf,
    /// Discretized test set; adds a `truth` column.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output TSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = RepresentationArg::Dfq)]
    representation: RepresentationArg,
    #[command(flatten)]
    quant: QuantArgs,
    #[arg(long, default_value_t = mvdfq_core::quantize::vq::DEFAULT_CODEBOOK_SIZE)]
    codebook_size: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    svm: SvmArgs,
    #[arg(long, default_value_t = mvdfq_core::learn::cv::DEFAULT_FOLDS)]
    folds: usize,
    /// Hold out whole groups (manifest `group` column) instead of stratifying.
    #[arg(long)]
    group_cv: bool,
    /// Positive class for ROC50 (defaults to the first label of two-class data).
    #[arg(long)]
    positive_label: Option<String>,
    /// Report TSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-sequence held-out predictions TSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalRoc50Args {
    /// TSV with a header naming a truth column and a score column.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, default_value = "truth")]
    truth_column: String,
    #[arg(long, default_value = "score")]
    score_column: String,
    /// Label treated as positive (defaults to the first label of two-class data).
    #[arg(long)]
    positive_label: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Each dimension of each sequence is an independent zero-mean AR(1)
/// process `x_t = phi*x_{t-1} + sqrt(1-phi^2)*e_t` with `e_t ~ N(0,1)` and
/// `x_0 ~ N(0,1)`. Class `c` of `C`, dimension `j` uses
/// `phi = -0.6 + 1.4*((c+j) mod C)/(C-1)`. Sequence `i` has id `s{i:04}`
/// and label `c{i mod C}`. Randomness: ChaCha8 seeded from `--seed`.
#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    /// Feature dimensions R.
    #[arg(long, default_value_t = 3)]
    dims: usize,
    /// Time steps n.
    #[arg(long, default_value_t = 300)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the CSV files and `manifest.tsv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = match mvdfq_core::with_threads(threads, move || commands::run(cli.command)) {
        Ok(r) => r,
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
