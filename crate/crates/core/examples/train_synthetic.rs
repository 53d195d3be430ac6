//! Trains one cell kind on the keyword corpus until it fits the training set
//! (at most `max_epochs`), then reports test accuracy.
//!
//! cargo run --example train_synthetic -- [srnn|gru|lstm|blstm] [max_epochs]

use std::time::Instant;

use rnntc::corpus::{generate_synthetic_corpus, ClassSet, NormalizationTables, SequenceConfig};
use rnntc::pipeline::{desk_config, per_class_split, prepare_records, DESK_SEQ_LEN, DESK_VOCAB};
use rnntc::recurrent::CellKind;
use rnntc::training::{evaluate_split, TrainConfig, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: CellKind = args.next().as_deref().unwrap_or("srnn").parse()?;
    let max_epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300);

    let records = generate_synthetic_corpus(1, 80);
    let prepared = prepare_records(
        &records,
        &ClassSet::damage_levels(),
        &NormalizationTables::bundled(),
        DESK_VOCAB,
        SequenceConfig::new(DESK_SEQ_LEN),
    )?;
    let data = prepared.dataset();
    let split = per_class_split(&prepared.labels, 4, 50, 5, 25)?;

    let start = Instant::now();
    let mut trainer = Trainer::new(
        &data,
        &split,
        desk_config(kind, 4),
        TrainConfig::new(max_epochs, 32, 1)?,
    )?;
    let mut first_perfect = None;
    println!("epoch train_loss val_loss val_acc train_acc");
    for _ in 0..max_epochs {
        let rec = trainer.run_epoch()?;
        let (_, train_acc) = evaluate_split(trainer.model(), &data, &split.train)?;
        if rec.epoch % 25 == 0 || (train_acc == 1.0 && first_perfect.is_none()) {
            println!(
                "{:>5} {:>10.4} {:>8.4} {:>7.3} {:>9.3}",
                rec.epoch, rec.train_loss, rec.val_loss, rec.val_accuracy, train_acc
            );
        }
        if train_acc == 1.0 {
            first_perfect = Some(rec.epoch);
            break;
        }
    }
    println!("train accuracy first reached 1.0 at epoch {first_perfect:?}");
    let (test_loss, test_acc) = evaluate_split(trainer.model(), &data, &split.test)?;
    println!(
        "{kind}: {} epochs, test loss {test_loss:.4}, test accuracy {test_acc:.3}, {:.1}s",
        trainer.epochs_run(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
