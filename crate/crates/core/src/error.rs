use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by the kind of failure so callers (the CLI in
/// particular) can map them onto process exit codes with [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("no observed values")]
    Empty,

    #[error("series has missing values")]
    MissingValues,

    #[error("series too short: need more than {needed} observations, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("constant series has zero variance")]
    ZeroVariance,

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("parameters are not stationary/invertible")]
    NotStationary,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model did not converge")]
    NotConverged,

    #[error("zero actual value at index {0}")]
    ZeroActual(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, one per CLI exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Input,
    InsufficientData,
    Numerical,
}

impl Error {
    /// Wraps an I/O error with the path it concerns.
    pub fn file(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::MalformedHeader(_)
            | Error::Parse { .. }
            | Error::DuplicateDate(_)
            | Error::File { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::ZeroActual(_)
            | Error::LengthMismatch(..) => ErrorKind::Input,
            Error::Empty | Error::MissingValues | Error::TooShort { .. } | Error::ZeroVariance => {
                ErrorKind::InsufficientData
            }
            Error::Singular(_)
            | Error::NotStationary
            | Error::Numerical(_)
            | Error::NotConverged => ErrorKind::Numerical,
        }
    }
}
