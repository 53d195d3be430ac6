use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{round_half_up_2, EvalError, EvalReport};

/// One model's weighted precision/recall/f1 and accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

pub const COMPARISON_HEADER: &str = "model,precision,recall,f1,accuracy";

/// Rows sorted by descending accuracy, ties by model name.
pub fn compare_models<S: AsRef<str>>(reports: &[(S, EvalReport)]) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|(name, r)| ComparisonRow {
            model: name.as_ref().to_string(),
            precision: r.weighted_avg.precision,
            recall: r.weighted_avg.recall,
            f1: r.weighted_avg.f1,
            accuracy: r.accuracy,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.model.cmp(&b.model))
    });
    rows
}

/// Full-precision CSV with header `model,precision,recall,f1,accuracy`.
pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COMPARISON_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Fixed-width table rounded half-up to two decimals.
pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.model.len())
        .chain([5])
        .max()
        .unwrap_or(5);
    let mut s = format!(
        "{:<width$} {:>9} {:>9} {:>9} {:>9}\n",
        "Model", "Precision", "Recall", "F1", "Accuracy"
    );
    for r in rows {
        s += &format!(
            "{:<width$} {:>9} {:>9} {:>9} {:>9}\n",
            r.model,
            round_half_up_2(r.precision),
            round_half_up_2(r.recall),
            round_half_up_2(r.f1),
            round_half_up_2(r.accuracy)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ClassMetrics;

    fn report(acc: f64) -> EvalReport {
        EvalReport::from_parts(
            vec![
                ClassMetrics::new("a", acc, acc, acc, 3),
                ClassMetrics::new("b", 1.0, 1.0, 1.0, 1),
            ],
            acc,
        )
        .unwrap()
    }

    #[test]
    fn sorted_by_accuracy_then_name() {
        let rows = compare_models(&[
            ("LSTM", report(0.5)),
            ("BLSTM", report(0.5)),
            ("GRU", report(0.9)),
        ]);
        let names: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
        assert_eq!(names, ["GRU", "BLSTM", "LSTM"]);
        assert_eq!(compare_models(&[("x", report(0.1))]).len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let rows = compare_models(&[("sRNN", report(0.7)), ("GRU", report(0.2))]);
        let mut buf = Vec::new();
        write_comparison_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(COMPARISON_HEADER));
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<ComparisonRow> = r.deserialize().collect::<Result<_, _>>().unwrap();
        assert_eq!(back, rows);
    }
}
