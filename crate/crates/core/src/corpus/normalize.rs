//! Rule-based narrative normalizer: case folding, punctuation stripping,
//! stop-word removal and dictionary-plus-suffix lemmatization.
//!
//! The bundled tables live in `assets/` and are versioned with the crate.
//! Every output token is a lemmatizer fixed point that is not a stop word,
//! which makes [`clean_text`] idempotent on its own (space-joined) output.

use std::collections::{HashMap, HashSet};

use super::CorpusError;

const BUNDLED_STOP_WORDS: &str = include_str!("../../assets/stopwords.txt");
const BUNDLED_LEMMAS: &str = include_str!("../../assets/lemmas.tsv");

/// Version tag of the bundled tables, recorded in bundles and model files.
pub const TABLES_VERSION: &str = "en-v1";

/// Upper bound on lemmatizer rewrites for a single token.
const MAX_REWRITES: usize = 32;

/// Endings after which a stripped `-ed`/`-ing` stem regains a final `e`
/// (`located` -> `locate`, `arrived` -> `arrive`).
const RESTORE_E: &[&str] = &[
    "at", "bl", "iz", "ag", "iv", "ov", "uc", "ic", "rg", "dg", "rc", "ac", "nc", "is", "os",
    "aus", "ous", "eas", "ais",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationTables {
    stop_words: HashSet<String>,
    lemmas: HashMap<String, String>,
    version: String,
}

impl NormalizationTables {
    /// The stop-word list and lemma table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOP_WORDS, BUNDLED_LEMMAS, TABLES_VERSION)
            .expect("bundled normalization tables are well-formed")
    }

    /// Parses tables from their text form: one stop word per line, and
    /// `surface<TAB>lemma` lines. Blank lines and `#` comments are skipped.
    pub fn parse(stop_words: &str, lemmas: &str, version: &str) -> Result<Self, CorpusError> {
        let stop_words = content_lines(stop_words)
            .map(|(_, w)| w.to_lowercase())
            .collect::<HashSet<_>>();
        let mut table = HashMap::new();
        for (lineno, line) in content_lines(lemmas) {
            let (surface, lemma) = line.split_once('\t').ok_or_else(|| {
                CorpusError::Table(format!("lemma line {lineno}: expected surface<TAB>lemma"))
            })?;
            let (surface, lemma) = (surface.trim().to_lowercase(), lemma.trim().to_lowercase());
            if surface.is_empty() || lemma.is_empty() {
                return Err(CorpusError::Table(format!(
                    "lemma line {lineno}: empty field"
                )));
            }
            table.insert(surface, lemma);
        }
        Ok(Self {
            stop_words,
            lemmas: table,
            version: version.to_string(),
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn is_stop_word(&self, token: &str) -> bool {
        self.stop_words.contains(token)
    }

    /// Reduces a lowercase token to its lemma: exception dictionary first,
    /// then suffix rules, repeated until nothing changes.
    pub fn lemmatize(&self, token: &str) -> String {
        let mut current = token.to_string();
        for _ in 0..MAX_REWRITES {
            let next = match self.lemmas.get(&current) {
                Some(lemma) if *lemma == current => break,
                Some(lemma) => lemma.clone(),
                None => match apply_suffix_rule(&current) {
                    Some(stem) => stem,
                    None => break,
                },
            };
            current = next;
        }
        current
    }
}

impl Default for NormalizationTables {
    fn default() -> Self {
        Self::bundled()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Lowercases, strips punctuation and special characters, removes stop
/// words and lemmatizes what is left.
///
/// Apostrophes are deleted outright so contractions and possessives stay
/// one token (`pilot's` -> `pilots` -> `pilot`); every other
/// non-alphanumeric character separates tokens.
pub fn clean_text(raw: &str, tables: &NormalizationTables) -> Vec<String> {
    let folded: String = raw
        .to_lowercase()
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}' | '\u{2018}'))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded
        .split_whitespace()
        .filter(|t| !tables.is_stop_word(t))
        .map(|t| tables.lemmatize(t))
        .filter(|t| !t.is_empty() && !tables.is_stop_word(t))
        .collect()
}

fn has_vowel(s: &str) -> bool {
    s.chars()
        .any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

/// One suffix rewrite, or `None` when no rule applies. Every rule strictly
/// shortens the token, so repeated application terminates.
fn apply_suffix_rule(token: &str) -> Option<String> {
    if token.len() < 4 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    if let Some(stem) = token.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if let Some(stem) = token.strip_suffix("ies") {
        return (token.len() > 4).then(|| format!("{stem}y"));
    }
    if let Some(stem) = token.strip_suffix("ied") {
        return (token.len() > 4).then(|| format!("{stem}y"));
    }
    if token.ends_with('s') {
        if ["ss", "us", "is"].iter().any(|s| token.ends_with(s)) {
            return None;
        }
        return token.strip_suffix('s').map(str::to_string);
    }
    if token.ends_with("eed") {
        return None;
    }
    let stem = token
        .strip_suffix("ed")
        .or_else(|| token.strip_suffix("ing"))?;
    if stem.len() < 3 || !has_vowel(stem) {
        return None;
    }
    Some(repair_stem(stem))
}

fn repair_stem(stem: &str) -> String {
    let bytes = stem.as_bytes();
    let (last, prev) = (bytes[bytes.len() - 1], bytes[bytes.len() - 2]);
    if last == prev && !matches!(last, b'l' | b's' | b'z') && !b"aeiou".contains(&last) {
        return stem[..stem.len() - 1].to_string();
    }
    if stem.ends_with("ur") && !stem.ends_with("our") {
        return format!("{stem}e");
    }
    // collaps(ed) -> collapse, sens(ed) -> sense
    let consonant_s = last == b's' && !b"aeiousy".contains(&prev);
    if consonant_s || RESTORE_E.iter().any(|end| stem.ends_with(end)) {
        return format!("{stem}e");
    }
    stem.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(s: &str) -> Vec<String> {
        clean_text(s, &NormalizationTables::bundled())
    }

    #[test]
    fn empty_input_yields_no_tokens() {
        assert!(clean("").is_empty());
        assert!(clean("  ,.;!  ").is_empty());
    }

    #[test]
    fn stop_word_and_suffix_rule() {
        assert_eq!(clean("The engine failed."), ["engine", "fail"]);
    }

    #[test]
    fn case_fold_and_punctuation() {
        assert_eq!(clean("AIRCRAFT, aircraft!"), ["aircraft", "aircraft"]);
    }

    #[test]
    fn trace_of_each_stage() {
        // Per-step trace for "The engine failed.": fold, strip, stop, lemma.
        let tables = NormalizationTables::bundled();
        let folded = "The engine failed.".to_lowercase();
        assert_eq!(folded, "the engine failed.");
        let stripped: Vec<&str> = folded
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .collect();
        assert_eq!(stripped, ["the", "engine", "failed"]);
        let kept: Vec<&str> = stripped
            .into_iter()
            .filter(|t| !tables.is_stop_word(t))
            .collect();
        assert_eq!(kept, ["engine", "failed"]);
        assert_eq!(tables.lemmatize("engine"), "engine");
        assert_eq!(apply_suffix_rule("failed").as_deref(), Some("fail"));
        assert_eq!(apply_suffix_rule("fail"), None);
    }

    #[test]
    fn suffix_rules() {
        let t = NormalizationTables::bundled();
        for (surface, lemma) in [
            ("engines", "engine"),
            ("injuries", "injury"),
            ("classes", "class"),
            ("landing", "land"),
            ("stopped", "stop"),
            ("located", "locate"),
            ("arrived", "arrive"),
            ("occurred", "occur"),
            ("secured", "secure"),
            ("taxied", "taxi"),
            ("status", "status"),
            ("gas", "gas"),
            ("proceed", "proceed"),
            ("737", "737"),
            ("flew", "fly"),
            ("damaged", "damage"),
            ("morning", "morning"),
            ("collapsed", "collapse"),
            ("bounced", "bounce"),
            ("sensed", "sense"),
            ("paused", "pause"),
            ("advised", "advise"),
            ("ceased", "cease"),
            ("exposed", "expose"),
            ("focused", "focus"),
            ("biased", "bias"),
            ("passing", "pass"),
        ] {
            assert_eq!(t.lemmatize(surface), lemma, "{surface}");
        }
    }

    #[test]
    fn apostrophes_join_tokens() {
        assert_eq!(clean("The pilot's report"), ["pilot", "report"]);
        assert_eq!(clean("didn't"), Vec::<String>::new());
    }

    #[test]
    fn lemma_table_outputs_are_fixed_points() {
        let t = NormalizationTables::bundled();
        for lemma in t.lemmas.values() {
            assert_eq!(&t.lemmatize(lemma), lemma);
            assert!(!t.is_stop_word(lemma), "{lemma} is a stop word");
        }
    }

    #[test]
    fn malformed_lemma_table_is_rejected() {
        let err = NormalizationTables::parse("the\n", "flew fly\n", "x").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn custom_tables() {
        let t = NormalizationTables::parse("# c\nfoo\n", "bars\tbaz\n", "test").unwrap();
        assert_eq!(clean_text("Foo bars qux", &t), ["baz", "qux"]);
        assert_eq!(t.version(), "test");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const WORDS: &[&str] = &[
            "The",
            "engine",
            "failed",
            "landing",
            "gear",
            "collapsed",
            "during",
            "taxiing",
            "pilot's",
            "reported",
            "Injuries",
            "none",
            "classes",
            "stopped",
            "arrived",
            "wasn't",
            "aircraft",
            "B737",
            "runway",
            "damaged",
            "flew",
            "occurred",
            "status",
            "x",
            "aa",
            "ing",
            "seed",
            "béton",
        ];

        fn narrative() -> impl Strategy<Value = String> {
            let word = prop_oneof![
                proptest::sample::select(WORDS).prop_map(str::to_string),
                "[a-zA-Z]{1,12}",
            ];
            let sep = proptest::sample::select(&[" ", ", ", ". ", "! ", " - ", "\n", "'"][..]);
            proptest::collection::vec((word, sep), 0..30)
                .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
        }

        proptest! {
            #[test]
            fn clean_text_is_idempotent(s in narrative()) {
                let t = NormalizationTables::bundled();
                let once = clean_text(&s, &t);
                let twice = clean_text(&once.join(" "), &t);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn lemmatize_is_idempotent(w in "[a-z]{1,15}") {
                let t = NormalizationTables::bundled();
                let l = t.lemmatize(&w);
                prop_assert_eq!(t.lemmatize(&l), l);
            }
        }
    }
}
