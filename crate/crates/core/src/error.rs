use crate::integrator::SolveError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite {0}")]
    NonFiniteInput(&'static str),
    #[error("time {t} outside segment [{t0}, {t1}]")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("loss undefined: energy {value} at shell {shell} is not positive")]
    NonPositiveEnergy { shell: usize, value: f64 },
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: String, expected: String },
    #[error("corrupted checkpoint: {0}")]
    CheckpointCorrupted(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The solver failure behind this error, if any.
    pub fn solve_error(&self) -> Option<&SolveError> {
        match self {
            Error::Solve(e) => Some(e),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
