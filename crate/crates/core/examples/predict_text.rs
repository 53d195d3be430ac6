//! Trains a small GRU on synthetic data, saves it, reloads it and classifies free text.
//!
//! cargo run --example predict_text -- "engine fire destroyed the airframe" "..."

use rnntc::cli::{cmd_predict, cmd_prepare, cmd_train, PredictInput, PrepareOptions, TrainOptions};
use rnntc::recurrent::CellKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut texts: Vec<String> = std::env::args().skip(1).collect();
    if texts.is_empty() {
        texts = vec![
            "During approach the pilot reported gusty crosswind; the wreckage was consumed by fire"
                .into(),
            "After takeoff the crew found a buckled spar and a fractured rib during inspection"
                .into(),
            "The student pilot made a routine landing; taxi was uneventful".into(),
            "the the and of".into(),
        ];
    }
    let dir = tempfile::tempdir()?;
    let bundle = dir.path().join("bundle");
    cmd_prepare(&PrepareOptions::synthetic(100, 5), &bundle)?;
    let model = dir.path().join("gru.json");
    let mut opts = TrainOptions::new(
        bundle,
        CellKind::Gru,
        model.clone(),
        dir.path().join("history.csv"),
    );
    opts.epochs = 20;
    let summary = cmd_train(&opts)?;
    println!(
        "GRU trained {} epochs, train accuracy {:.3}\n",
        summary.history.len(),
        summary.train_accuracy
    );

    let (preds, warnings) = cmd_predict(&model, &PredictInput::Texts(texts.clone()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for (text, p) in texts.iter().zip(preds) {
        let probs: Vec<String> = p
            .probabilities
            .iter()
            .map(|c| format!("{} {:.3}", c.class, c.probability))
            .collect();
        let flag = if p.empty_input {
            " (nothing left after cleaning)"
        } else {
            ""
        };
        println!("{text:?}\n  -> {}{flag} [{}]", p.class, probs.join(", "));
    }
    Ok(())
}
