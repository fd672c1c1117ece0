use std::path::PathBuf;

/// Errors raised anywhere in the quantize / kernel / gram / learn pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension {dim} is constant ({value}); it cannot be binned")]
    ConstantDimension { dim: usize, value: f64 },

    #[error("dimension {dim} has {distinct} distinct values, need at least {bins}")]
    TooFewDistinctValues { dim: usize, distinct: usize, bins: usize },

    #[error("{samples} samples available, need at least {needed}")]
    TooFewSamples { samples: usize, needed: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("symbol {symbol} outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: u32 },

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("negative feature weight {weight} for feature {feature}")]
    NegativeWeight { feature: u64, weight: f64 },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("kernel evaluation failed for pair ({left}, {right})")]
    KernelPair {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("only one class present ({0})")]
    SingleClass(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("class {label} has {count} members, fewer than {folds} folds")]
    TooFewPerClass { label: String, count: usize, folds: usize },

    #[error("sequence {0} has no group key")]
    UnknownGroupKey(String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("{path}:{line}: non-numeric cell {cell:?}")]
    NonNumericCell { path: PathBuf, line: usize, cell: String },

    #[error("{path}:{line}: expected {expected} columns, found {found}")]
    InconsistentColumns {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: NaN or infinite value")]
    NaNOrInf { path: PathBuf, line: usize },

    #[error("{path}:{line}: unknown residue {residue:?}")]
    UnknownResidue { path: PathBuf, line: usize, residue: char },

    #[error("no label for sequence {0}")]
    MissingLabel(String),

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
