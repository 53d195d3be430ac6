//! Recurrent classifier: cells, parameters, forward and backward passes.

mod activations;
mod batch;
mod cells;
mod config;
mod gradcheck;
mod network;
mod params;

pub use activations::*;
pub use batch::BatchCache;
pub use cells::{
    concat, gru_compose, gru_gates, lstm_compose, lstm_gates, srnn_step, GruGates, GruStep,
    LstmGates, LstmStep, SrnnStep,
};
pub use config::*;
pub use gradcheck::*;
pub use network::*;
pub use params::*;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("token id {id} out of range for embedding with {rows} rows")]
    IdOutOfRange { id: usize, rows: usize },
    #[error("stale forward cache: {0}")]
    StaleCache(String),
}
