use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph not connected")]
    Disconnected,

    #[error("graph does not mix: sigma2 = {0} (must be < 1)")]
    DoesNotMix(f64),

    #[error("invalid weight matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("random geometric graph stayed disconnected after {attempts} placements (radius {radius})")]
    GeometricRetries { attempts: usize, radius: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("step size {eta} outside the window ({lo}, {hi})")]
    StepSize { eta: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not in the domain: {0}")]
    Domain(String),

    #[error("point is infeasible (distance {distance:e})")]
    Infeasible { distance: f64 },

    #[error("minimizer oracle did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("config: {message} at line {line}")]
    Config { line: usize, message: String },

    #[error("config: missing required key '{0}'")]
    ConfigMissing(String),

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_round(self, round: usize) -> Error {
        match self {
            e @ Error::Round { .. } => e,
            e => Error::Round {
                round,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
