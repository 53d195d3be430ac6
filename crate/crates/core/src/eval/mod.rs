//! Confusion matrices, per-class and averaged metrics, reports and model comparison.

mod compare;
mod confusion;
mod metrics;
mod report;

pub use compare::*;
pub use confusion::*;
pub use metrics::*;
pub use report::*;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{truths} truths but {preds} predictions")]
    LengthMismatch { truths: usize, preds: usize },
    #[error("class index {index} out of range for {k} classes")]
    ClassOutOfRange { index: usize, k: usize },
    #[error("report has no classes")]
    Empty,
    #[error("total support is zero; weighted averages are undefined")]
    NoSupport,
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
