use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Id reserved for padding positions.
pub const PAD_ID: usize = 0;
/// Id for tokens without an assigned id.
pub const OOV_ID: usize = 1;
/// Number of reserved ids preceding the first token id.
pub const RESERVED_IDS: usize = 2;

/// Vocabulary cap for full-size CSV corpora.
pub const DEFAULT_MAX_VOCAB: usize = 100_000;

/// Frequency-ranked token -> id map.
///
/// Token `tokens[k]` has id `k + 2`; ids 0 and 1 are PAD and OOV. Tokens are
/// ordered by descending corpus frequency, ties broken lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    max_size: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    max_size: usize,
    tokens: Vec<String>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Self::from_ranked(r.tokens, r.max_size)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            max_size: v.max_size,
            tokens: v.tokens,
        }
    }
}

impl Vocabulary {
    /// Counts token occurrences over the corpus and keeps the `max_size`
    /// most frequent.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], max_size: usize) -> Self {
        assert!(max_size >= 1, "vocabulary max_size must be at least 1");
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_ref()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size);
        Self::from_ranked(
            ranked.into_iter().map(|(t, _)| t.to_string()).collect(),
            max_size,
        )
    }

    /// Rebuilds a vocabulary from an already-ranked token list.
    pub fn from_ranked(tokens: Vec<String>, max_size: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(k, t)| (t.clone(), k + RESERVED_IDS))
            .collect();
        Self {
            max_size,
            tokens,
            index,
        }
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Token for an assigned id; `None` for PAD, OOV and out-of-range ids.
    pub fn token(&self, id: usize) -> Option<&str> {
        id.checked_sub(RESERVED_IDS)
            .and_then(|k| self.tokens.get(k))
            .map(String::as_str)
    }

    /// Number of assigned (non-reserved) tokens.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Exclusive upper bound on every id this vocabulary can emit.
    pub fn id_bound(&self) -> usize {
        self.tokens.len() + RESERVED_IDS
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// SHA-256 over the ranked token list; identifies the id assignment.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.max_size as u64).to_le_bytes());
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}
