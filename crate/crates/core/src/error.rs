use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale guard: {what} (limit {limit})")]
    ScaleGuard { what: String, limit: String },

    #[error("uniformization needs {needed} steps, budget is {budget}")]
    StepBudget { needed: u64, budget: u64 },

    #[error("probability vector invalid: {0}")]
    InvalidDistribution(String),

    #[error("total variation increased by {increase:.3e} between t = {t_prev} and t = {t}")]
    NonMonotone { t_prev: f64, t: f64, increase: f64 },

    #[error("{0} did not converge")]
    NonConvergence(String),

    #[error("missing grid points: {0}")]
    MissingGrid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
