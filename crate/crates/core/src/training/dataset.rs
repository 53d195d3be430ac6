use crate::corpus::TokenSequence;
use crate::recurrent::ModelConfig;

use super::TrainError;

/// Encoded sequences with their class indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub sequences: Vec<TokenSequence>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(
        sequences: Vec<TokenSequence>,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, TrainError> {
        if sequences.len() != labels.len() {
            return Err(TrainError::Data(format!(
                "{} sequences but {} labels",
                sequences.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(TrainError::Data(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        Ok(Self {
            sequences,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks that every sequence fits the model's length, vocabulary and class count.
    pub fn check_compatible(&self, cfg: &ModelConfig) -> Result<(), TrainError> {
        if cfg.n_classes != self.n_classes {
            return Err(TrainError::Data(format!(
                "model has {} classes, data has {}",
                cfg.n_classes, self.n_classes
            )));
        }
        let rows = cfg.embedding_rows();
        for (i, s) in self.sequences.iter().enumerate() {
            if s.len() != cfg.seq_len {
                return Err(TrainError::Data(format!(
                    "sequence {i} has length {} (model expects {})",
                    s.len(),
                    cfg.seq_len
                )));
            }
            if let Some(&id) = s.ids().iter().find(|&&id| id >= rows) {
                return Err(TrainError::Data(format!(
                    "sequence {i} holds id {id} beyond the {rows}-row embedding"
                )));
            }
        }
        Ok(())
    }
}
