use thiserror::Error;

use crate::model::Violation;
use crate::sync::SyncResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("system too large: n_deg = {n_deg} exceeds the dense limit of {limit}")]
    TooLarge { n_deg: usize, limit: usize },

    #[error("steady state is not unique ({0})")]
    NonUniqueSteadyState(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// No optimizer start reached the gradient tolerance; carries the best point seen.
    #[error("optimizer did not converge after {iterations} iterations (best s_max = {})", .best.s_max)]
    NotConverged {
        iterations: usize,
        best: Box<SyncResult>,
    },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("power-law fit: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("{}: {}", v.field, v.message))
        .collect::<Vec<_>>()
        .join("; ")
}
