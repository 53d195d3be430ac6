use std::io::Write;

use serde::{Deserialize, Serialize};

use super::TrainError;

/// Per-epoch losses and validation accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

pub const HISTORY_HEADER: &str = "epoch,train_loss,val_loss,val_accuracy";

/// Writes `epoch,train_loss,val_loss,val_accuracy` rows.
pub fn write_history<W: Write>(out: W, history: &[EpochRecord]) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_writer(out);
    for r in history {
        w.serialize(r)?;
    }
    if history.is_empty() {
        w.write_record(HISTORY_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history<R: std::io::Read>(input: R) -> Result<Vec<EpochRecord>, TrainError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
