use thiserror::Error;

/// Errors produced by chain construction, the hitting-time solver and the
/// access-time routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected} states, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row {row} of the transition matrix sums to {sum} (must be 1)")]
    NotStochastic { row: usize, sum: f64 },

    #[error("chain is reducible: {0}")]
    Reducible(String),

    #[error("singular linear system at pivot {0}")]
    Singular(usize),

    #[error("chain is not reversible (detailed-balance residual {0:e})")]
    NotReversible(f64),

    #[error("hitting times are not symmetric (max asymmetry {0:e})")]
    AsymmetricHitting(f64),

    #[error("state space of {size} states exceeds the solver ceiling of {ceiling}")]
    TooLarge { size: usize, ceiling: usize },

    #[error("labels are not integers; moment functionals need integer states")]
    NonIntegerLabels,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error: 2 for input validation, 3 for
    /// numerical failures (reducible or singular systems).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Reducible(_) | Error::Singular(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
