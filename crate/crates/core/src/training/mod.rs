//! Adam, the minibatch epoch loop, and training history.

mod adam;
mod dataset;
mod history;
mod trainer;

pub use adam::*;
pub use dataset::*;
pub use history::*;
pub use trainer::*;

use thiserror::Error;

use crate::recurrent::ModelError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("invalid dataset: {0}")]
    Data(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("parameter shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("failed to write history: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to write history: {0}")]
    Csv(#[from] csv::Error),
}
