use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Core { path: PathBuf, source: mcens::Error },
    #[error(transparent)]
    Compute(#[from] mcens::Error),
}

impl CliError {
    /// 2 config or usage, 3 missing input file, 4 malformed file,
    /// 5 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingFile(_) => 3,
            CliError::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 3,
            CliError::Io { .. } => 1,
            CliError::Core { source, .. } | CliError::Compute(source) => core_code(source),
        }
    }
}

fn core_code(e: &mcens::Error) -> i32 {
    use mcens::Error as E;
    match e {
        E::Io(io) if io.kind() == io::ErrorKind::NotFound => 3,
        E::Format(_) => 4,
        E::InvalidArgument(_) => 2,
        E::RankDeficient { .. }
        | E::Conditioning(_)
        | E::DegenerateSample { .. }
        | E::Fit(_)
        | E::NotConverged { .. }
        | E::Diverged { .. } => 5,
        _ => 1,
    }
}

/// Attaches a path to a library error raised while reading or writing it.
pub(crate) trait AtPath<T> {
    fn at(self, path: &std::path::Path) -> CliResult<T>;
}

impl<T> AtPath<T> for mcens::Result<T> {
    fn at(self, path: &std::path::Path) -> CliResult<T> {
        self.map_err(|source| match source {
            mcens::Error::Io(e) if e.kind() == io::ErrorKind::NotFound => CliError::MissingFile(path.to_owned()),
            source => CliError::Core { path: path.to_owned(), source },
        })
    }
}

impl<T> AtPath<T> for io::Result<T> {
    fn at(self, path: &std::path::Path) -> CliResult<T> {
        self.map_err(|source| match source.kind() {
            io::ErrorKind::NotFound => CliError::MissingFile(path.to_owned()),
            _ => CliError::Io { path: path.to_owned(), source },
        })
    }
}
