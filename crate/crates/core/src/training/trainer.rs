use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_update, AdamHyper, AdamState, Dataset, EpochRecord, TrainError};
use crate::corpus::{one_hot, DatasetSplit, TokenSequence};
use crate::recurrent::{cross_entropy, predict, ModelConfig, Parameters, RecurrentClassifier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default = "yes")]
    pub shuffle: bool,
    #[serde(default)]
    pub adam: AdamHyper,
}

fn yes() -> bool {
    true
}

impl TrainConfig {
    pub const DEFAULT_EPOCHS: usize = 20;
    pub const DEFAULT_BATCH_SIZE: usize = 32;

    pub fn new(epochs: usize, batch_size: usize, seed: u64) -> Result<Self, TrainError> {
        let cfg = Self {
            epochs,
            batch_size,
            seed,
            shuffle: true,
            adam: AdamHyper::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: Self::DEFAULT_EPOCHS,
            batch_size: Self::DEFAULT_BATCH_SIZE,
            seed: 0,
            shuffle: true,
            adam: AdamHyper::default(),
        }
    }
}

/// Seeded initial model for `cfg`; shares its seed with the shuffle stream
/// but draws from a different ChaCha stream.
pub fn init_model(cfg: ModelConfig, seed: u64) -> Result<RecurrentClassifier, TrainError> {
    cfg.validate()?;
    Ok(RecurrentClassifier::new(
        cfg,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )?)
}

fn shuffle_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Epoch-at-a-time training state.
#[derive(Debug)]
pub struct Trainer<'a> {
    data: &'a Dataset,
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    config: TrainConfig,
    model: RecurrentClassifier,
    adam: AdamState,
    grads: Parameters,
    rng: ChaCha8Rng,
    history: Vec<EpochRecord>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        data: &'a Dataset,
        split: &DatasetSplit,
        model_config: ModelConfig,
        config: TrainConfig,
    ) -> Result<Self, TrainError> {
        let model = init_model(model_config, config.seed)?;
        Self::with_model(model, data, split, config)
    }

    /// Continues from an existing model with fresh optimizer state.
    pub fn with_model(
        model: RecurrentClassifier,
        data: &'a Dataset,
        split: &DatasetSplit,
        config: TrainConfig,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        data.check_compatible(&model.config)?;
        if split.train.is_empty() {
            return Err(TrainError::EmptySplit("train"));
        }
        if split.validation.is_empty() {
            return Err(TrainError::EmptySplit("validation"));
        }
        split
            .check(data.len(), false)
            .map_err(|e| TrainError::Data(e.to_string()))?;
        let adam = AdamState::new(&model.params, config.adam);
        Ok(Self {
            data,
            train_idx: split.train.clone(),
            val_idx: split.validation.clone(),
            grads: model.params.zeros_like(),
            rng: shuffle_rng(config.seed),
            config,
            model,
            adam,
            history: Vec::new(),
        })
    }

    pub fn model(&self) -> &RecurrentClassifier {
        &self.model
    }

    pub fn history(&self) -> &[EpochRecord] {
        &self.history
    }

    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }

    pub fn into_parts(self) -> (RecurrentClassifier, Vec<EpochRecord>) {
        (self.model, self.history)
    }

    /// One sweep over the (shuffled) training indices followed by validation.
    pub fn run_epoch(&mut self) -> Result<EpochRecord, TrainError> {
        let epoch = self.history.len() + 1;
        let mut order = self.train_idx.clone();
        if self.config.shuffle {
            order.shuffle(&mut self.rng);
        }
        let k = self.data.n_classes;
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(self.config.batch_size).enumerate() {
            let mut batch = batch.to_vec();
            batch.sort_unstable();
            self.grads.fill(0.0);
            let seqs: Vec<&TokenSequence> =
                batch.iter().map(|&i| &self.data.sequences[i]).collect();
            let targets: Vec<Vec<f64>> = batch
                .iter()
                .map(|&i| one_hot(self.data.labels[i], k))
                .collect();
            let targets: Vec<ArrayView1<f64>> =
                targets.iter().map(ArrayView1::from).collect();
            let cache = self.model.forward_batch(&seqs)?;
            for (probs, y) in cache.probabilities().iter().zip(&targets) {
                let loss = cross_entropy(probs.view(), *y);
                if !loss.is_finite() {
                    return Err(TrainError::NonFiniteLoss {
                        epoch,
                        batch: b + 1,
                    });
                }
                loss_sum += loss;
            }
            self.model
                .backward_batch_into(&cache, &targets, &mut self.grads)?;
            let scale = 1.0 / batch.len() as f64;
            for s in self.grads.slices_mut() {
                s.iter_mut().for_each(|g| *g *= scale);
            }
            adam_update(&mut self.model.params, &self.grads, &mut self.adam)?;
            if !self.model.params.all_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: b + 1,
                });
            }
        }
        let (val_loss, val_accuracy) = evaluate_split(&self.model, self.data, &self.val_idx)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / order.len() as f64,
            val_loss,
            val_accuracy,
        };
        self.history.push(record);
        Ok(record)
    }
}

/// Trains for `train_config.epochs` epochs, returning the final model and per-epoch history.
pub fn train(
    data: &Dataset,
    split: &DatasetSplit,
    model_config: ModelConfig,
    train_config: &TrainConfig,
) -> Result<(RecurrentClassifier, Vec<EpochRecord>), TrainError> {
    let mut trainer = Trainer::new(data, split, model_config, train_config.clone())?;
    for _ in 0..train_config.epochs {
        trainer.run_epoch()?;
    }
    Ok(trainer.into_parts())
}

/// Argmax predictions for the given records.
pub fn predict_indices(
    model: &RecurrentClassifier,
    data: &Dataset,
    indices: &[usize],
) -> Result<Vec<usize>, TrainError> {
    let seqs = gather(data, indices)?;
    Ok(model
        .probabilities_batch(&seqs)?
        .iter()
        .map(|p| predict(p.view()))
        .collect())
}

fn gather<'d>(data: &'d Dataset, indices: &[usize]) -> Result<Vec<&'d TokenSequence>, TrainError> {
    indices
        .iter()
        .map(|&i| {
            data.sequences
                .get(i)
                .ok_or_else(|| TrainError::Data(format!("index {i} out of range")))
        })
        .collect()
}

/// Mean cross-entropy and accuracy over `indices`.
pub fn evaluate_split(
    model: &RecurrentClassifier,
    data: &Dataset,
    indices: &[usize],
) -> Result<(f64, f64), TrainError> {
    if indices.is_empty() {
        return Err(TrainError::EmptySplit("evaluation"));
    }
    let probs = model.probabilities_batch(&gather(data, indices)?)?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (p, &i) in probs.iter().zip(indices) {
        let label = data.labels[i];
        loss += cross_entropy(p.view(), ArrayView1::from(&one_hot(label, data.n_classes)));
        correct += usize::from(predict(p.view()) == label);
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}
