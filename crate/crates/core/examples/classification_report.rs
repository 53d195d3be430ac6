//! Renders a per-class report and a two-model comparison from fixed metrics,
//! then a report computed from a small confusion matrix.
//!
//! cargo run --example classification_report

use rnntc::eval::{
    compare_models, confusion_matrix, render_comparison, render_report, ClassMetrics, EvalReport,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [
        ("Minor", 0.69, 0.56, 0.61, 675),
        ("None", 0.91, 0.98, 0.94, 8737),
        ("Substantial", 0.93, 0.84, 0.88, 416),
        ("Destroyed", 0.64, 0.24, 0.35, 801),
    ];
    let classes = rows
        .iter()
        .map(|&(n, p, r, f, s)| ClassMetrics::new(n, p, r, f, s))
        .collect();
    let fixed = EvalReport::from_parts(classes, 0.89)?;
    println!("{}", render_report(&fixed)?.text);

    let names = ["Minor", "None", "Substantial", "Destroyed"];
    let truth = [0, 0, 1, 1, 1, 1, 2, 2, 3, 3, 3, 1];
    let pred = [0, 1, 1, 1, 1, 0, 2, 3, 3, 3, 1, 1];
    let cm = confusion_matrix(&truth, &pred, &names)?;
    let small = EvalReport::from_confusion(&cm)?;
    println!("{}", render_report(&small)?.text);

    let table = compare_models(&[("fixed", fixed), ("small", small)]);
    println!("{}", render_comparison(&table));
    Ok(())
}
