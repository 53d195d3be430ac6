//! Cleans a few narratives, builds a vocabulary and encodes fixed-length sequences.
//!
//! cargo run --example clean_and_encode

use rnntc::corpus::{
    clean_text, encode_label, encode_sequence, split_dataset, ClassSet, NormalizationTables,
    SequenceConfig, Vocabulary,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tables = NormalizationTables::bundled();
    let narratives = [
        (
            "The pilot's landing gear collapsed during the taxi; the propeller struck the runway.",
            "Substantial",
        ),
        (
            "Aircraft was destroyed by post-impact fire after the engines lost power.",
            "Destroyed",
        ),
        (
            "During climb the student noticed smoke; landed without further incident.",
            "None",
        ),
        (
            "Minor damage to the left wingtip when it contacted a hangar door.",
            "Minor",
        ),
    ];
    let cleaned: Vec<Vec<String>> = narratives
        .iter()
        .map(|(text, _)| clean_text(text, &tables))
        .collect();
    for ((text, _), tokens) in narratives.iter().zip(&cleaned) {
        println!("{text}\n  -> {tokens:?}");
    }

    let vocab = Vocabulary::build(&cleaned, 50);
    println!(
        "\nvocabulary: {} tokens, fingerprint {}",
        vocab.len(),
        &vocab.fingerprint()[..16]
    );

    let classes = ClassSet::damage_levels();
    let cfg = SequenceConfig::new(12);
    for ((_, label), tokens) in narratives.iter().zip(&cleaned) {
        let seq = encode_sequence(tokens, &vocab, &cfg);
        let enc = encode_label(label, &classes)?;
        println!("{label:>11} {:?} ids {:?}", enc, seq.ids());
    }

    let split = split_dataset(1000, 7)?;
    println!(
        "\n1000 records split: train {}, validation {}, test {}",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    Ok(())
}
