//! Glue from raw records to an encoded [`Dataset`], plus the desk-scale defaults.

use crate::corpus::{
    clean_text, encode_sequence, ClassSet, CorpusError, DatasetSplit, NormalizationTables,
    RawRecord, SequenceConfig, TokenSequence, Vocabulary,
};
use crate::recurrent::{CellKind, ModelConfig};
use crate::training::Dataset;

pub const DESK_SEQ_LEN: usize = 64;
pub const DESK_VOCAB: usize = 500;
pub const DESK_EMBED_DIM: usize = 16;
pub const DESK_HIDDEN_DIM: usize = 32;

/// Desk-scale architecture: L=64, vocabulary 500, E=16, H=32, dense [32].
pub fn desk_config(kind: CellKind, n_classes: usize) -> ModelConfig {
    ModelConfig::new(
        kind,
        DESK_VOCAB,
        DESK_EMBED_DIM,
        DESK_HIDDEN_DIM,
        n_classes,
        DESK_SEQ_LEN,
    )
}

/// Encoded records sharing one vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedCorpus {
    pub classes: ClassSet,
    pub vocabulary: Vocabulary,
    pub seq_config: SequenceConfig,
    pub sequences: Vec<TokenSequence>,
    pub labels: Vec<usize>,
}

impl PreparedCorpus {
    pub fn dataset(&self) -> Dataset {
        Dataset {
            sequences: self.sequences.clone(),
            labels: self.labels.clone(),
            n_classes: self.classes.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Cleans every narrative, builds the vocabulary over all of them, and
/// encodes sequences and labels.
pub fn prepare_records(
    records: &[RawRecord],
    classes: &ClassSet,
    tables: &NormalizationTables,
    max_vocab: usize,
    seq_config: SequenceConfig,
) -> Result<PreparedCorpus, CorpusError> {
    let labels = records
        .iter()
        .map(|r| classes.index_of(&r.label))
        .collect::<Result<Vec<_>, _>>()?;
    let tokens: Vec<Vec<String>> = records
        .iter()
        .map(|r| clean_text(&r.narrative, tables))
        .collect();
    let vocabulary = Vocabulary::build(&tokens, max_vocab);
    let sequences = tokens
        .iter()
        .map(|t| encode_sequence(t, &vocabulary, &seq_config))
        .collect();
    Ok(PreparedCorpus {
        classes: classes.clone(),
        vocabulary,
        seq_config,
        sequences,
        labels,
    })
}

/// Takes the first `train`, then `validation`, then `test` records of each
/// class in record order. Errors when a class has too few records.
pub fn per_class_split(
    labels: &[usize],
    n_classes: usize,
    train: usize,
    validation: usize,
    test: usize,
) -> Result<DatasetSplit, CorpusError> {
    let mut s = DatasetSplit {
        seed: 0,
        train: vec![],
        validation: vec![],
        test: vec![],
    };
    for k in 0..n_classes {
        let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == k).collect();
        if idx.len() < train + validation + test {
            return Err(CorpusError::Split(format!(
                "class {k} has {} records, need {}",
                idx.len(),
                train + validation + test
            )));
        }
        s.train.extend(&idx[..train]);
        s.validation.extend(&idx[train..train + validation]);
        s.test
            .extend(&idx[train + validation..train + validation + test]);
    }
    for part in [&mut s.train, &mut s.validation, &mut s.test] {
        part.sort_unstable();
    }
    s.check(labels.len(), false)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_synthetic_corpus;

    #[test]
    fn synthetic_round() {
        let recs = generate_synthetic_corpus(1, 20);
        let p = prepare_records(
            &recs,
            &ClassSet::damage_levels(),
            &NormalizationTables::bundled(),
            DESK_VOCAB,
            SequenceConfig::new(DESK_SEQ_LEN),
        )
        .unwrap();
        assert_eq!(p.len(), 80);
        assert!(p.sequences.iter().all(|s| s.len() == DESK_SEQ_LEN));
        p.dataset()
            .check_compatible(&desk_config(CellKind::Lstm, 4))
            .unwrap();
        let s = per_class_split(&p.labels, 4, 10, 2, 8).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (40, 8, 32)
        );
        assert!(per_class_split(&p.labels, 4, 10, 2, 9).is_err());
    }

    #[test]
    fn unknown_label() {
        let recs = vec![RawRecord {
            narrative: "x".into(),
            label: "Severe".into(),
        }];
        let err = prepare_records(
            &recs,
            &ClassSet::damage_levels(),
            &NormalizationTables::bundled(),
            10,
            SequenceConfig::new(4),
        );
        assert!(matches!(err, Err(CorpusError::UnknownLabel(_))));
    }
}
