//! Library side of the `rnntc` command line: dataset bundles, the model
//! file format, and one function per subcommand.

mod bundle;
mod commands;
mod model_file;

pub use bundle::*;
pub use commands::*;
pub use model_file::*;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::recurrent::ModelError;
use crate::training::TrainError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad files, columns, flags or incompatible artifacts.
    #[error("{0}")]
    Input(String),
    /// Training diverged.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}
