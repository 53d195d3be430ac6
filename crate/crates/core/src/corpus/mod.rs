//! Narrative ingestion and preprocessing: CSV loading, normalization,
//! vocabulary, fixed-length encoding, labels and the train/validation/test split.

mod csv_io;
mod encode;
mod normalize;
mod split;
mod synthetic;
mod vocab;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{
    load_csv, read_csv, read_narratives, CsvLoad, DEFAULT_LABEL_COLUMN, DEFAULT_NARRATIVE_COLUMN,
};
pub use encode::{
    encode_label, encode_sequence, one_hot, ClassSet, LabelEncoding, Padding, SequenceConfig,
    TokenSequence, Truncation, DEFAULT_SEQ_LEN,
};
pub use normalize::{clean_text, NormalizationTables, TABLES_VERSION};
pub use split::{split_dataset, DatasetSplit, TEST_PERCENT, VALIDATION_PERCENT};
pub use synthetic::{generate_synthetic_corpus, CLASS_KEYWORDS};
pub use vocab::{Vocabulary, DEFAULT_MAX_VOCAB, OOV_ID, PAD_ID, RESERVED_IDS};

/// One occurrence narrative and its damage-level label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub narrative: String,
    pub label: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column {0:?} in CSV header")]
    MissingColumn(String),
    #[error("malformed CSV row at line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("insufficient records: {n} records give train={train}, validation={validation}, test={test}")]
    InsufficientRecords {
        n: usize,
        train: usize,
        validation: usize,
        test: usize,
    },
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid normalization table: {0}")]
    Table(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
