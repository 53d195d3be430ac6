use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Srnn,
    Gru,
    Lstm,
    Blstm,
}

impl CellKind {
    pub const ALL: [CellKind; 4] = [
        CellKind::Srnn,
        CellKind::Gru,
        CellKind::Lstm,
        CellKind::Blstm,
    ];

    /// Display name as used in reports (`sRNN`, `GRU`, ...).
    pub fn display_name(self) -> &'static str {
        match self {
            CellKind::Srnn => "sRNN",
            CellKind::Gru => "GRU",
            CellKind::Lstm => "LSTM",
            CellKind::Blstm => "BLSTM",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for CellKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "srnn" | "rnn" => Ok(CellKind::Srnn),
            "gru" => Ok(CellKind::Gru),
            "lstm" => Ok(CellKind::Lstm),
            "blstm" | "bilstm" => Ok(CellKind::Blstm),
            _ => Err(ModelError::Config(format!("unknown cell kind {s:?}"))),
        }
    }
}

/// Architecture of an embedding -> recurrent -> dense(ReLU) -> softmax classifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub cell_kind: CellKind,
    /// Number of assignable token ids; the embedding has two more rows (PAD, OOV).
    pub vocab_capacity: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub dense_dims: Vec<usize>,
    pub n_classes: usize,
    pub seq_len: usize,
    /// Drop the GRU gate biases, matching the bias-free GRU equations literally.
    #[serde(default)]
    pub strict_paper_gru_bias: bool,
}

impl ModelConfig {
    pub const DEFAULT_EMBED_DIM: usize = 64;
    pub const DEFAULT_DENSE: usize = 32;

    pub fn new(
        cell_kind: CellKind,
        vocab_capacity: usize,
        embed_dim: usize,
        hidden_dim: usize,
        n_classes: usize,
        seq_len: usize,
    ) -> Self {
        Self {
            cell_kind,
            vocab_capacity,
            embed_dim,
            hidden_dim,
            dense_dims: vec![Self::DEFAULT_DENSE],
            n_classes,
            seq_len,
            strict_paper_gru_bias: false,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let dims = [
            ("vocab_capacity", self.vocab_capacity),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("seq_len", self.seq_len),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(ModelError::Config(format!("{name} must be at least 1")));
            }
        }
        if self.dense_dims.contains(&0) {
            return Err(ModelError::Config(
                "dense layer widths must be at least 1".into(),
            ));
        }
        if self.n_classes < 2 {
            return Err(ModelError::Config(format!(
                "need at least 2 classes, got {}",
                self.n_classes
            )));
        }
        Ok(())
    }

    /// Rows in the embedding table.
    pub fn embedding_rows(&self) -> usize {
        self.vocab_capacity + crate::corpus::RESERVED_IDS
    }

    /// Width of the recurrent feature vector fed to the classifier head.
    pub fn feature_dim(&self) -> usize {
        match self.cell_kind {
            CellKind::Blstm => 2 * self.hidden_dim,
            _ => self.hidden_dim,
        }
    }
}
