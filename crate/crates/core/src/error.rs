use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("ill-posed target: maximal eigenvalue is degenerate (gap {gap:.3e})")]
    DegenerateTarget { gap: f64 },

    #[error("non-finite state encountered at grid point {step}")]
    NonFiniteState { step: usize },

    #[error(
        "basis too small: population {population:.3e} in the top two j levels at grid point {step} \
         exceeds {limit:.1e}; increase j_max"
    )]
    BasisTooSmall {
        population: f64,
        step: usize,
        limit: f64,
    },

    #[error("monotonicity violated: delta J at mu = 1 is {delta:.3e}")]
    MonotonicityViolation { delta: f64 },

    #[error("cubic solver failed for coefficients {coefficients:?}")]
    SolverFailure { coefficients: [f64; 4] },

    #[error("filter error: {0}")]
    Filter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
