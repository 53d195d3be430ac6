use serde::{Deserialize, Serialize};

use super::{aggregate, class_metrics, Averages, ClassMetrics, ConfusionMatrix, EvalError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total_support: u64,
}

impl EvalReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Result<Self, EvalError> {
        Self::from_parts(class_metrics(cm), cm.accuracy())
    }

    /// Builds a report from per-class metrics and an externally known accuracy.
    pub fn from_parts(classes: Vec<ClassMetrics>, accuracy: f64) -> Result<Self, EvalError> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(EvalError::Inconsistent(format!(
                "accuracy {accuracy} outside [0, 1]"
            )));
        }
        let agg = aggregate(&classes)?;
        Ok(Self {
            classes,
            accuracy,
            macro_avg: agg.macro_avg,
            weighted_avg: agg.weighted_avg,
            total_support: agg.total_support,
        })
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Formats `x` with two decimals, rounding halves away from zero.
///
/// The value is first snapped to nine decimals so that binary representation
/// error (0.695 is stored as 0.69499999...) does not defeat the half-up rule.
pub fn round_half_up_2(x: f64) -> String {
    let nano = (x.abs() * 1e9).round() as u128;
    let cents = (nano + 5_000_000) / 10_000_000;
    let sign = if x < 0.0 && cents != 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", cents / 100, cents % 100)
}

/// Text table plus its full-precision JSON twin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedReport {
    pub text: String,
    pub json: String,
}

pub fn render_report(report: &EvalReport) -> Result<RenderedReport, EvalError> {
    let width = report
        .classes
        .iter()
        .map(|c| c.name.len())
        .chain([12])
        .max()
        .unwrap_or(12);
    let mut text = format!(
        "{:>width$} {:>9} {:>9} {:>9} {:>9}\n\n",
        "", "precision", "recall", "f1-score", "support"
    );
    let row = |name: &str, p: f64, r: f64, f: f64, s: u64| {
        format!(
            "{name:>width$} {:>9} {:>9} {:>9} {s:>9}\n",
            round_half_up_2(p),
            round_half_up_2(r),
            round_half_up_2(f)
        )
    };
    for c in &report.classes {
        text += &row(&c.name, c.precision, c.recall, c.f1, c.support);
    }
    text.push('\n');
    text += &format!(
        "{:>width$} {:>9} {:>9} {:>9} {:>9}\n",
        "accuracy",
        "",
        "",
        round_half_up_2(report.accuracy),
        report.total_support
    );
    let m = report.macro_avg;
    let w = report.weighted_avg;
    text += &row(
        "macro avg",
        m.precision,
        m.recall,
        m.f1,
        report.total_support,
    );
    text += &row(
        "weighted avg",
        w.precision,
        w.recall,
        w.f1,
        report.total_support,
    );
    Ok(RenderedReport {
        text,
        json: report.to_json()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::confusion_matrix;

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up_2(0.695), "0.70");
        assert_eq!(round_half_up_2(0.694999), "0.69");
        assert_eq!(round_half_up_2(0.125), "0.13");
        assert_eq!(round_half_up_2(1.0), "1.00");
        assert_eq!(round_half_up_2(0.0), "0.00");
        assert_eq!(round_half_up_2(0.8722), "0.87");
        assert_eq!(round_half_up_2(-0.005), "-0.01");
    }

    #[test]
    fn text_and_json_agree() {
        let cm = confusion_matrix(
            &[0, 0, 1, 2, 2, 2],
            &[0, 1, 1, 2, 2, 0],
            &["None", "Minor", "Destroyed"],
        )
        .unwrap();
        let r = EvalReport::from_confusion(&cm).unwrap();
        let out = render_report(&r).unwrap();
        let back = EvalReport::from_json(&out.json).unwrap();
        assert_eq!(back, r);
        for c in &back.classes {
            let line = out
                .text
                .lines()
                .find(|l| l.split_whitespace().next() == Some(&c.name))
                .unwrap();
            let cols: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(cols[1], round_half_up_2(c.precision));
            assert_eq!(cols[4], c.support.to_string());
        }
        assert!(out.text.contains("accuracy"));
        assert!(out
            .text
            .lines()
            .any(|l| l.trim_start().starts_with("weighted avg")));
    }
}
