use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::corpus::{ClassSet, DatasetSplit, SequenceConfig, TokenSequence, Vocabulary};
use crate::training::Dataset;

pub const BUNDLE_VERSION: &str = "1.0";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const SPLIT_FILE: &str = "split.json";
pub const SEQUENCES_FILE: &str = "sequences.csv";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordCounts {
    pub raw: usize,
    pub dropped_empty_label: usize,
    pub retained: usize,
    pub per_class: Vec<ClassCount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: String,
    /// `synthetic` or the CSV file name.
    pub source: String,
    pub seed: u64,
    pub classes: ClassSet,
    pub sequence: SequenceConfig,
    pub tables_version: String,
    pub counts: RecordCounts,
    pub vocabulary_fingerprint: String,
    pub data_fingerprint: String,
}

/// An encoded dataset as stored on disk by `prepare`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub manifest: Manifest,
    pub vocabulary: Vocabulary,
    pub split: DatasetSplit,
    pub sequences: Vec<TokenSequence>,
    pub labels: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SequenceRow {
    label: usize,
    ids: String,
}

fn sequences_csv(sequences: &[TokenSequence], labels: &[usize]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (s, &label) in sequences.iter().zip(labels) {
        let ids = s
            .ids()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        w.serialize(SequenceRow { label, ids })
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Input(e.to_string()))
}

/// Content hash over the vocabulary, class order and encoded rows.
pub fn data_fingerprint(
    vocabulary: &Vocabulary,
    classes: &ClassSet,
    sequences_csv: &[u8],
) -> String {
    let mut h = Sha256::new();
    h.update(vocabulary.fingerprint().as_bytes());
    for c in classes.names() {
        h.update(c.as_bytes());
        h.update([0]);
    }
    h.update(sequences_csv);
    hex::encode(h.finalize())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Input(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

impl Bundle {
    /// Assembles a bundle, filling in both fingerprints.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source: String,
        seed: u64,
        classes: ClassSet,
        sequence: SequenceConfig,
        tables_version: String,
        counts: RecordCounts,
        vocabulary: Vocabulary,
        split: DatasetSplit,
        sequences: Vec<TokenSequence>,
        labels: Vec<usize>,
    ) -> Result<Self, CliError> {
        let csv = sequences_csv(&sequences, &labels)?;
        let manifest = Manifest {
            format_version: BUNDLE_VERSION.into(),
            source,
            seed,
            vocabulary_fingerprint: vocabulary.fingerprint(),
            data_fingerprint: data_fingerprint(&vocabulary, &classes, &csv),
            classes,
            sequence,
            tables_version,
            counts,
        };
        Ok(Self {
            manifest,
            vocabulary,
            split,
            sequences,
            labels,
        })
    }

    pub fn classes(&self) -> &ClassSet {
        &self.manifest.classes
    }

    pub fn dataset(&self) -> Dataset {
        Dataset {
            sequences: self.sequences.clone(),
            labels: self.labels.clone(),
            n_classes: self.classes().len(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let parts = [
            (MANIFEST_FILE, json_bytes(&self.manifest)?),
            (VOCABULARY_FILE, json_bytes(&self.vocabulary)?),
            (SPLIT_FILE, json_bytes(&self.split)?),
            (
                SEQUENCES_FILE,
                sequences_csv(&self.sequences, &self.labels)?,
            ),
        ];
        for (name, bytes) in parts {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }

    /// Reads a bundle and verifies its fingerprint and internal consistency.
    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
        if manifest.format_version.split('.').next() != BUNDLE_VERSION.split('.').next() {
            return Err(CliError::Input(format!(
                "unsupported bundle version {}",
                manifest.format_version
            )));
        }
        ClassSet::new(manifest.classes.names().to_vec())?;
        let vocabulary: Vocabulary = read_json(&dir.join(VOCABULARY_FILE))?;
        let split: DatasetSplit = read_json(&dir.join(SPLIT_FILE))?;
        let path = dir.join(SEQUENCES_FILE);
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let mut sequences = Vec::new();
        let mut labels = Vec::new();
        for row in csv::Reader::from_reader(bytes.as_slice()).deserialize::<SequenceRow>() {
            let row = row.map_err(|e| CliError::io(&path, e))?;
            let ids = row
                .ids
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<Vec<usize>, _>>()
                .map_err(|e| CliError::io(&path, e))?;
            if ids.len() != manifest.sequence.seq_len {
                return Err(CliError::io(
                    &path,
                    format!(
                        "sequence of length {} in a bundle with L={}",
                        ids.len(),
                        manifest.sequence.seq_len
                    ),
                ));
            }
            if row.label >= manifest.classes.len() {
                return Err(CliError::io(
                    &path,
                    format!("label index {} out of range", row.label),
                ));
            }
            sequences.push(TokenSequence::from_ids(ids));
            labels.push(row.label);
        }
        if data_fingerprint(&vocabulary, &manifest.classes, &bytes) != manifest.data_fingerprint {
            return Err(CliError::Input(format!(
                "{}: data fingerprint does not match its contents",
                dir.display()
            )));
        }
        split.check(labels.len(), true)?;
        Ok(Self {
            manifest,
            vocabulary,
            split,
            sequences,
            labels,
        })
    }
}
