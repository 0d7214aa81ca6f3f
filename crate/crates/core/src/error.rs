//! Error type shared by every module, plus the CLI exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("assembly failed at grid point {index} ({coords:?}): {message}")]
    Assembly {
        index: usize,
        coords: Vec<f64>,
        message: String,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no convergence after {iterations} iterations (best residuals {residuals:?})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("estimator failure: {0}")]
    Estimator(String),

    #[error("root finding failed: {message}; scanned sign profile {profile:?}")]
    RootFind {
        message: String,
        profile: Vec<(f64, f64)>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 config, 3 numeric, 4 estimator, 5 root-find.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::Json(_)
            | Error::Io(_) => 2,
            Error::Dimension { .. }
            | Error::Assembly { .. }
            | Error::Numeric(_)
            | Error::NoConvergence { .. }
            | Error::Csv(_) => 3,
            Error::Estimator(_) => 4,
            Error::RootFind { .. } => 5,
        }
    }
}
