//! Error type shared across the pipeline.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record that does not satisfy the input schema, with its line number.
    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate pub_id '{0}'")]
    DuplicatePubId(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(
        "no convergence after {iterations} iterations (max |score| = {score_max:.3e}; \
         log-likelihood trail: {})",
        trail(trace)
    )]
    NonConvergence {
        iterations: usize,
        score_max: f64,
        trace: Vec<f64>,
    },

    #[error("quasi-separation detected: coefficient for '{column}' exceeded |{cap}|")]
    Separation { column: String, cap: f64 },

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("correlation matrix is singular; dependent columns: {}", columns.join(", "))]
    SingularCorrelation { columns: Vec<String> },

    #[error("column '{0}' has zero variance")]
    ZeroVariance(String),

    #[error("infeasible simulation config: {0}")]
    SimConfig(String),
}

fn trail(trace: &[f64]) -> String {
    let tail: Vec<String> = trace
        .iter()
        .rev()
        .take(4)
        .rev()
        .map(|v| format!("{v:.6}"))
        .collect();
    tail.join(" -> ")
}

impl Error {
    /// Numeric failures (non-convergence, separation, singular systems) map to
    /// a distinct process exit code from input/validation failures.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Separation { .. }
                | Error::RankDeficient { .. }
                | Error::SingularCorrelation { .. }
                | Error::ZeroVariance(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
