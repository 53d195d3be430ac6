use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, PAD_ID};
use super::CorpusError;

/// Sequence length for full-size CSV corpora.
pub const DEFAULT_SEQ_LEN: usize = 2000;

/// Where padding zeros go when a document is shorter than the sequence length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Zeros before the content, so the last token sits at the final step.
    #[default]
    Pre,
    Post,
}

/// Which end of an over-long document survives truncation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Keep the first `L` ids.
    #[default]
    KeepFirst,
    KeepLast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub seq_len: usize,
    pub padding: Padding,
    pub truncation: Truncation,
}

impl SequenceConfig {
    pub fn new(seq_len: usize) -> Self {
        Self {
            seq_len,
            padding: Padding::Pre,
            truncation: Truncation::KeepFirst,
        }
    }
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self::new(DEFAULT_SEQ_LEN)
    }
}

/// Fixed-length id sequence fed to the embedding layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<usize>);

impl TokenSequence {
    /// Wraps raw ids without padding. The length becomes the sequence length.
    pub fn from_ids(ids: Vec<usize>) -> Self {
        Self(ids)
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every position is padding.
    pub fn is_all_pad(&self) -> bool {
        self.0.iter().all(|&id| id == PAD_ID)
    }
}

/// Maps tokens to ids (unknown -> OOV) and pads or truncates to `cfg.seq_len`.
pub fn encode_sequence<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    cfg: &SequenceConfig,
) -> TokenSequence {
    assert!(cfg.seq_len >= 1, "sequence length must be at least 1");
    let ids: Vec<usize> = tokens.iter().map(|t| vocab.id(t.as_ref())).collect();
    TokenSequence(fit_length(ids, cfg))
}

fn fit_length(mut ids: Vec<usize>, cfg: &SequenceConfig) -> Vec<usize> {
    let len = cfg.seq_len;
    if ids.len() > len {
        match cfg.truncation {
            Truncation::KeepFirst => ids.truncate(len),
            Truncation::KeepLast => {
                ids.drain(..ids.len() - len);
            }
        }
        return ids;
    }
    let pad = len - ids.len();
    match cfg.padding {
        Padding::Pre => {
            let mut out = vec![PAD_ID; pad];
            out.extend(ids);
            out
        }
        Padding::Post => {
            ids.resize(len, PAD_ID);
            ids
        }
    }
}

/// Ordered class names, matched case-insensitively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassSet(Vec<String>);

impl ClassSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, CorpusError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(CorpusError::Config(format!(
                "need at least 2 classes, got {}",
                names.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i]
                .iter()
                .any(|b| b.to_lowercase() == a.to_lowercase())
            {
                return Err(CorpusError::Config(format!("duplicate class name {a:?}")));
            }
        }
        Ok(Self(names))
    }

    /// None < Minor < Substantial < Destroyed.
    pub fn damage_levels() -> Self {
        Self(
            ["None", "Minor", "Substantial", "Destroyed"]
                .map(String::from)
                .to_vec(),
        )
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, CorpusError> {
        let folded = label.trim().to_lowercase();
        self.0
            .iter()
            .position(|n| n.to_lowercase() == folded)
            .ok_or_else(|| CorpusError::UnknownLabel(label.to_string()))
    }
}

impl Default for ClassSet {
    fn default() -> Self {
        Self::damage_levels()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelEncoding {
    pub class_index: usize,
    pub one_hot: Vec<f64>,
}

pub fn encode_label(label: &str, classes: &ClassSet) -> Result<LabelEncoding, CorpusError> {
    let class_index = classes.index_of(label)?;
    Ok(LabelEncoding {
        class_index,
        one_hot: one_hot(class_index, classes.len()),
    })
}

pub fn one_hot(index: usize, n_classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_classes];
    v[index] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        // a..e get ids 2..6
        Vocabulary::from_ranked(["a", "b", "c", "d", "e"].map(String::from).to_vec(), 10)
    }

    #[test]
    fn pre_padding() {
        let v = Vocabulary::from_ranked((0..6).map(|i| format!("t{i}")).collect(), 10);
        // t3 -> 5, t5 -> 7
        let s = encode_sequence(&["t3", "t5"], &v, &SequenceConfig::new(4));
        assert_eq!(s.ids(), [0, 0, 5, 7]);
    }

    #[test]
    fn keeps_first_ids_on_truncation() {
        let v = Vocabulary::from_ranked(
            ["x", "a", "b", "c", "d", "e"].map(String::from).to_vec(),
            10,
        );
        let s = encode_sequence(&["a", "b", "c", "d", "e"], &v, &SequenceConfig::new(3));
        assert_eq!(s.ids(), [3, 4, 5]);
    }

    #[test]
    fn unknown_token_is_oov() {
        let s = encode_sequence(&["zzz"], &vocab(), &SequenceConfig::new(2));
        assert_eq!(s.ids(), [0, 1]);
    }

    #[test]
    fn alternate_sides() {
        let cfg = SequenceConfig {
            seq_len: 3,
            padding: Padding::Post,
            truncation: Truncation::KeepLast,
        };
        assert_eq!(encode_sequence(&["a"], &vocab(), &cfg).ids(), [2, 0, 0]);
        assert_eq!(
            encode_sequence(&["a", "b", "c", "d"], &vocab(), &cfg).ids(),
            [3, 4, 5]
        );
    }

    #[test]
    fn empty_tokens_are_all_pad() {
        let s = encode_sequence::<&str>(&[], &vocab(), &SequenceConfig::new(5));
        assert!(s.is_all_pad());
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn label_one_hot() {
        let classes = ClassSet::damage_levels();
        assert_eq!(
            encode_label("Minor", &classes).unwrap().one_hot,
            [0.0, 1.0, 0.0, 0.0]
        );
        assert_eq!(
            encode_label("destroyed", &classes).unwrap().one_hot,
            [0.0, 0.0, 0.0, 1.0]
        );
        let err = encode_label("Catastrophic", &classes).unwrap_err();
        assert!(err.to_string().contains("Catastrophic"));
    }

    #[test]
    fn class_set_rejects_duplicates_and_singletons() {
        assert!(ClassSet::new(["a", "A"]).is_err());
        assert!(ClassSet::new(["only"]).is_err());
        assert_eq!(ClassSet::new(["x", "y"]).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn length_and_padding_invariants(
            toks in proptest::collection::vec("[a-g]", 0..20),
            len in 1usize..12,
            pre in any::<bool>(),
            first in any::<bool>(),
        ) {
            let v = vocab();
            let cfg = SequenceConfig {
                seq_len: len,
                padding: if pre { Padding::Pre } else { Padding::Post },
                truncation: if first { Truncation::KeepFirst } else { Truncation::KeepLast },
            };
            let s = encode_sequence(&toks, &v, &cfg);
            prop_assert_eq!(s.len(), len);
            prop_assert!(s.ids().iter().all(|&id| id < v.id_bound()));
            let n_pad = len.saturating_sub(toks.len());
            let pads: &[usize] = if pre { &s.ids()[..n_pad] } else { &s.ids()[len - n_pad..] };
            prop_assert!(pads.iter().all(|&id| id == PAD_ID));
            prop_assert!(s.ids().iter().filter(|&&id| id != PAD_ID).count() == toks.len().min(len));
        }

        #[test]
        fn one_hot_sums_to_one(k in 2usize..10, i in 0usize..10) {
            let i = i % k;
            let v = one_hot(i, k);
            prop_assert_eq!(v.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(v[i], 1.0);
        }
    }
}
