//! Prepares a synthetic bundle, trains all four cell kinds on it and prints
//! the comparison table over the shared test split.
//!
//! cargo run --example compare_cells -- [epochs]

use rnntc::cli::{cmd_compare, cmd_prepare, cmd_train, CsvColumns, PrepareOptions, TrainOptions};
use rnntc::recurrent::CellKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(15);
    let dir = tempfile::tempdir()?;
    let bundle = dir.path().join("bundle");
    println!(
        "{}\n",
        cmd_prepare(&PrepareOptions::synthetic(150, 3), &bundle)?
    );

    let mut models = Vec::new();
    for kind in CellKind::ALL {
        let model = dir.path().join(format!("{kind}.json"));
        let mut opts = TrainOptions::new(
            bundle.clone(),
            kind,
            model.clone(),
            dir.path().join(format!("{kind}.csv")),
        );
        opts.epochs = epochs;
        opts.seed = 3;
        let summary = cmd_train(&opts)?;
        let last = summary.history.last().expect("at least one epoch");
        println!(
            "{kind}: train acc {:.3}, val acc {:.3}",
            summary.train_accuracy, last.val_accuracy
        );
        models.push(model);
    }
    let out = cmd_compare(&models, &bundle, &CsvColumns::default())?;
    println!("\n{}", out.table);
    Ok(())
}
