use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Convergence,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation | ErrorKind::Io => 2,
            ErrorKind::Convergence => 3,
            ErrorKind::Numeric => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Convergence => "convergence",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("case mismatch: operation needs case {expected}, input is case {found}")]
    CaseMismatch { expected: char, found: char },

    #[error("parity violation at eigenvalue {eigenvalue}: {laplace} + {dirac} is odd")]
    Parity {
        eigenvalue: f64,
        laplace: i64,
        dirac: i64,
    },

    #[error("empty spectrum: {0}")]
    EmptySpectrum(String),

    #[error("too few zeros: need at least {needed}, got {got}")]
    TooFewZeros { needed: usize, got: usize },

    #[error("outside the half-plane of convergence: Re(s) = {re_s} must exceed {abscissa}")]
    Convergence { re_s: f64, abscissa: f64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("series did not converge: {0}")]
    SeriesDivergence(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("tail bound {bound:e} exceeds tolerance {tolerance:e}")]
    TailUnachievable { bound: f64, tolerance: f64 },

    #[error("pole of order {order} at s = {re}+{im}i")]
    Pole { re: f64, im: f64, order: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::CaseMismatch { .. }
            | Error::Parity { .. }
            | Error::EmptySpectrum(_)
            | Error::TooFewZeros { .. }
            | Error::Json(_) => ErrorKind::Validation,
            Error::Convergence { .. } => ErrorKind::Convergence,
            Error::Overflow(_)
            | Error::SeriesDivergence(_)
            | Error::IllConditioned(_)
            | Error::TailUnachievable { .. }
            | Error::Pole { .. } => ErrorKind::Numeric,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
