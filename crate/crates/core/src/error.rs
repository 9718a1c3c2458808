use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("periods are not the contiguous range -K..=1: {0}")]
    NonContiguousPeriods(String),

    #[error("invalid panel: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular: {0}")]
    SingularMatrix(String),

    #[error("matrix is not positive definite: {0}")]
    CholeskyFailure(String),

    #[error("pre-period covariance block is singular")]
    SingularSigma22,

    #[error("truncation window has no probability mass")]
    DegenerateWindow,

    #[error("no bracketing interval within +/-{limit} standard deviations (root lies {})", if *.above { "above" } else { "below" })]
    NoBracket { above: bool, limit: f64 },

    #[error("quantile-unbiased estimate is unbounded ({})", if *.positive { "+inf" } else { "-inf" })]
    UnboundedEstimate { positive: bool },

    #[error("observed coefficients violate the conditioning constraint (row {row})")]
    ConstraintViolated { row: usize },

    #[error("contrast has zero variance")]
    ZeroContrast,

    #[error("polynomial design matrix is rank deficient")]
    RankDeficientX,

    #[error("only {accepted} draws satisfied the conditioning event (need {required})")]
    DegenerateAcceptance { accepted: usize, required: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Io(_) => ErrorKind::Parse,
            Error::InsufficientData(_)
            | Error::NonContiguousPeriods(_)
            | Error::Validation(_)
            | Error::InvalidArgument(_) => ErrorKind::Validation,
            _ => ErrorKind::Numerical,
        }
    }
}
