use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Counts indexed `[true class][predicted class]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion_matrix<S: AsRef<str>>(
    truths: &[usize],
    preds: &[usize],
    class_names: &[S],
) -> Result<ConfusionMatrix, EvalError> {
    if truths.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            truths: truths.len(),
            preds: preds.len(),
        });
    }
    let k = class_names.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truths.iter().zip(preds) {
        for index in [t, p] {
            if index >= k {
                return Err(EvalError::ClassOutOfRange { index, k });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: class_names.iter().map(|s| s.as_ref().to_string()).collect(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn col_sum(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }

    /// `trace / total`, or 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }

    /// CSV grid: header `true,<class...>`, then one row per true class.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["true".to_string()];
        header.extend(self.class_names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.class_names.iter().zip(&self.counts) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
