use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems reading or writing one of the on-disk formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("truncated payload while reading {what}")]
    Truncated { what: &'static str },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("invalid sample ids: {0}")]
    Ids(String),
    #[error("invalid header: {0}")]
    Header(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("normal equations are rank deficient (rank {rank} of {dim})")]
    RankDeficient { rank: usize, dim: usize },
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),
    #[error("sample {id:?} has zero norm")]
    DegenerateSample { id: String },
    #[error("sample ids do not align, missing: {missing:?}")]
    Alignment { missing: Vec<String> },
    #[error("cannot fit class statistics: {0}")]
    Fit(String),
    #[error("sinkhorn marginal deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    NotConverged { deviation: f64, tolerance: f64 },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("architecture mismatch: {0}")]
    Architecture(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
