//! Keyword-planted narrative generator used as a desk-scale stand-in for
//! real occurrence reports.
//!
//! Each damage level owns a disjoint set of signal keywords. A record is a
//! few template sentences built from shared filler vocabulary with two to
//! four of its class keywords planted at random positions, so the label
//! is recoverable from the text while most tokens carry no signal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RawRecord;

/// Signal keywords per class, in [`super::ClassSet::damage_levels`] order.
/// Every keyword is already in normalized form.
pub const CLASS_KEYWORDS: [(&str, &[&str]); 4] = [
    (
        "None",
        &[
            "uneventful",
            "routine",
            "normal",
            "intact",
            "precaution",
            "safe",
        ],
    ),
    (
        "Minor",
        &["scratch", "dent", "scuff", "nick", "abrasion", "chip"],
    ),
    (
        "Substantial",
        &["buckle", "fracture", "rupture", "spar", "crumple", "deform"],
    ),
    (
        "Destroyed",
        &[
            "wreckage",
            "inferno",
            "obliterate",
            "debris",
            "hull",
            "consume",
        ],
    ),
];

const SUBJECTS: &[&str] = &[
    "The pilot",
    "The crew",
    "The instructor",
    "The student pilot",
    "The operator",
];
const PHASES: &[&str] = &[
    "approach", "takeoff", "climb", "cruise", "descent", "taxi", "circuit",
];
const FILLER: &[&str] = &[
    "runway",
    "tower",
    "wind",
    "weather",
    "fuel",
    "checklist",
    "airport",
    "altitude",
    "heading",
    "clearance",
    "passenger",
    "cabin",
    "radio",
    "visibility",
    "propeller",
    "flap",
    "throttle",
    "gusty",
    "crosswind",
    "aerodrome",
    "inspection",
    "maintenance",
    "report",
    "track",
    "traffic",
];

/// Emits `4 * n_per_class` records, interleaved by class (record `i` has
/// class `i % 4`). Deterministic per seed.
pub fn generate_synthetic_corpus(seed: u64, n_per_class: usize) -> Vec<RawRecord> {
    assert!(n_per_class >= 1, "n_per_class must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(4 * n_per_class);
    for _ in 0..n_per_class {
        for (class, keywords) in CLASS_KEYWORDS {
            out.push(RawRecord {
                narrative: narrative(&mut rng, keywords),
                label: class.to_string(),
            });
        }
    }
    out
}

fn narrative(rng: &mut ChaCha8Rng, keywords: &[&str]) -> String {
    let subject = SUBJECTS.choose(rng).unwrap();
    let phase = PHASES.choose(rng).unwrap();
    let mut words: Vec<&str> = (0..rng.gen_range(4..=9))
        .map(|_| *FILLER.choose(rng).unwrap())
        .collect();
    for _ in 0..rng.gen_range(2..=4) {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, keywords.choose(rng).unwrap());
    }
    let split = rng.gen_range(1..words.len());
    format!(
        "{subject} reported that during the {phase}, {}. Later the {}.",
        words[..split].join(" "),
        words[split..].join(" ")
    )
}
