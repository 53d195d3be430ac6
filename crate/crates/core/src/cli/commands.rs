use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Bundle, ClassCount, CliError, Provenance, RecordCounts, TrainedModel};
use crate::corpus::{
    clean_text, encode_sequence, generate_synthetic_corpus, load_csv, split_dataset, ClassSet,
    NormalizationTables, Padding, RawRecord, SequenceConfig, Truncation, DEFAULT_MAX_VOCAB,
    DEFAULT_SEQ_LEN, TABLES_VERSION,
};
use crate::eval::{
    compare_models, confusion_matrix, render_comparison, render_report, write_comparison_csv,
    ComparisonRow, ConfusionMatrix, EvalReport, RenderedReport,
};
use crate::pipeline::{prepare_records, DESK_EMBED_DIM, DESK_HIDDEN_DIM, DESK_SEQ_LEN, DESK_VOCAB};
use crate::recurrent::{predict, CellKind, ModelConfig};
use crate::training::{
    evaluate_split, predict_indices, write_history, Dataset, EpochRecord, TrainConfig, Trainer,
};

/// Hidden width used for CSV bundles when none is given.
pub const DEFAULT_HIDDEN_DIM: usize = 64;
pub const SYNTHETIC_SOURCE: &str = "synthetic";

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        narrative_column: String,
        label_column: String,
    },
    Synthetic {
        per_class: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrepareOptions {
    pub source: DataSource,
    pub seed: u64,
    /// Defaults to 64 for synthetic data, 2000 for CSV input.
    pub seq_len: Option<usize>,
    /// Defaults to 500 for synthetic data, 100,000 for CSV input.
    pub max_vocab: Option<usize>,
    pub padding: Padding,
    pub truncation: Truncation,
    /// Class order; the four damage levels when `None`.
    pub classes: Option<Vec<String>>,
}

impl PrepareOptions {
    pub fn synthetic(per_class: usize, seed: u64) -> Self {
        Self {
            source: DataSource::Synthetic { per_class },
            seed,
            seq_len: None,
            max_vocab: None,
            padding: Padding::default(),
            truncation: Truncation::default(),
            classes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrepareSummary {
    pub counts: RecordCounts,
    pub vocabulary_size: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl std::fmt::Display for PrepareSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.counts;
        writeln!(f, "raw records: {}", c.raw)?;
        writeln!(f, "dropped (empty label): {}", c.dropped_empty_label)?;
        writeln!(f, "retained: {}", c.retained)?;
        for pc in &c.per_class {
            writeln!(f, "  {}: {}", pc.class, pc.count)?;
        }
        writeln!(f, "vocabulary: {} tokens", self.vocabulary_size)?;
        write!(
            f,
            "split: train {}, validation {}, test {}",
            self.train, self.validation, self.test
        )
    }
}

/// Loads or generates records, encodes them and writes a bundle to `out`.
pub fn cmd_prepare(opts: &PrepareOptions, out: &Path) -> Result<PrepareSummary, CliError> {
    let classes = match &opts.classes {
        Some(names) => ClassSet::new(names.clone())?,
        None => ClassSet::damage_levels(),
    };
    let (records, raw, dropped, source, seq_len, max_vocab): (
        Vec<RawRecord>,
        usize,
        usize,
        String,
        usize,
        usize,
    ) = match &opts.source {
        DataSource::Synthetic { per_class } => {
            if *per_class == 0 {
                return Err(CliError::Input("--per-class must be at least 1".into()));
            }
            if classes != ClassSet::damage_levels() {
                return Err(CliError::Input(
                    "synthetic data uses the four damage levels".into(),
                ));
            }
            let recs = generate_synthetic_corpus(opts.seed, *per_class);
            let n = recs.len();
            (
                recs,
                n,
                0,
                SYNTHETIC_SOURCE.into(),
                DESK_SEQ_LEN,
                DESK_VOCAB,
            )
        }
        DataSource::Csv {
            path,
            narrative_column,
            label_column,
        } => {
            let load = load_csv(path, narrative_column, label_column)?;
            let name = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (
                load.records,
                load.rows_read,
                load.dropped_empty_label,
                name,
                DEFAULT_SEQ_LEN,
                DEFAULT_MAX_VOCAB,
            )
        }
    };
    let seq = SequenceConfig {
        seq_len: opts.seq_len.unwrap_or(seq_len),
        padding: opts.padding,
        truncation: opts.truncation,
    };
    if seq.seq_len == 0 {
        return Err(CliError::Input("sequence length must be at least 1".into()));
    }
    let tables = NormalizationTables::bundled();
    let prepared = prepare_records(
        &records,
        &classes,
        &tables,
        opts.max_vocab.unwrap_or(max_vocab),
        seq,
    )?;
    let split = split_dataset(prepared.len(), opts.seed)?;
    let per_class = classes
        .names()
        .iter()
        .enumerate()
        .map(|(k, name)| ClassCount {
            class: name.clone(),
            count: prepared.labels.iter().filter(|&&l| l == k).count(),
        })
        .collect();
    let counts = RecordCounts {
        raw,
        dropped_empty_label: dropped,
        retained: prepared.len(),
        per_class,
    };
    let summary = PrepareSummary {
        counts: counts.clone(),
        vocabulary_size: prepared.vocabulary.len(),
        train: split.train.len(),
        validation: split.validation.len(),
        test: split.test.len(),
    };
    let bundle = Bundle::new(
        source,
        opts.seed,
        classes,
        seq,
        tables.version().to_string(),
        counts,
        prepared.vocabulary,
        split,
        prepared.sequences,
        prepared.labels,
    )?;
    bundle.write(out)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    pub bundle: PathBuf,
    pub cell: CellKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Defaults to 16 for synthetic bundles, 64 otherwise.
    pub embed_dim: Option<usize>,
    /// Defaults to 32 for synthetic bundles, 64 otherwise.
    pub hidden_dim: Option<usize>,
    pub dense_dims: Vec<usize>,
    pub strict_paper_gru_bias: bool,
    pub model_out: PathBuf,
    pub history_out: PathBuf,
}

impl TrainOptions {
    pub fn new(bundle: PathBuf, cell: CellKind, model_out: PathBuf, history_out: PathBuf) -> Self {
        Self {
            bundle,
            cell,
            epochs: TrainConfig::DEFAULT_EPOCHS,
            batch_size: TrainConfig::DEFAULT_BATCH_SIZE,
            seed: 0,
            embed_dim: None,
            hidden_dim: None,
            dense_dims: vec![ModelConfig::DEFAULT_DENSE],
            strict_paper_gru_bias: false,
            model_out,
            history_out,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub history: Vec<EpochRecord>,
    pub train_accuracy: f64,
    pub head_input_dim: usize,
}

pub fn cmd_train(opts: &TrainOptions) -> Result<TrainSummary, CliError> {
    let bundle = Bundle::read(&opts.bundle)?;
    let synthetic = bundle.manifest.source == SYNTHETIC_SOURCE;
    let (e, h) = if synthetic {
        (DESK_EMBED_DIM, DESK_HIDDEN_DIM)
    } else {
        (ModelConfig::DEFAULT_EMBED_DIM, DEFAULT_HIDDEN_DIM)
    };
    let mut cfg = ModelConfig::new(
        opts.cell,
        bundle.vocabulary.max_size(),
        opts.embed_dim.unwrap_or(e),
        opts.hidden_dim.unwrap_or(h),
        bundle.classes().len(),
        bundle.manifest.sequence.seq_len,
    );
    cfg.dense_dims = opts.dense_dims.clone();
    cfg.strict_paper_gru_bias = opts.strict_paper_gru_bias;
    let train_config = TrainConfig::new(opts.epochs, opts.batch_size, opts.seed)?;

    let data = bundle.dataset();
    let mut trainer = Trainer::new(&data, &bundle.split, cfg, train_config.clone())?;
    for _ in 0..opts.epochs {
        trainer.run_epoch()?;
    }
    let (model, history) = trainer.into_parts();
    let (_, train_accuracy) = evaluate_split(&model, &data, &bundle.split.train)?;
    let head_input_dim = model.config.feature_dim();
    let trained = TrainedModel {
        classes: bundle.classes().clone(),
        sequence: bundle.manifest.sequence,
        tables_version: bundle.manifest.tables_version.clone(),
        vocabulary: bundle.vocabulary,
        model,
        provenance: Provenance {
            seed: opts.seed,
            data_fingerprint: bundle.manifest.data_fingerprint,
            epochs: opts.epochs,
            train_config,
        },
    };
    trained.save(&opts.model_out)?;
    let mut buf = Vec::new();
    write_history(&mut buf, &history)?;
    if let Some(dir) = opts
        .history_out
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(&opts.history_out, buf).map_err(|e| CliError::io(&opts.history_out, e))?;
    Ok(TrainSummary {
        history,
        train_accuracy,
        head_input_dim,
    })
}

/// Column names used when evaluation or prediction data is a CSV file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvColumns {
    pub narrative: String,
    pub label: String,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self {
            narrative: crate::corpus::DEFAULT_NARRATIVE_COLUMN.into(),
            label: crate::corpus::DEFAULT_LABEL_COLUMN.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluateOutput {
    pub report: EvalReport,
    pub rendered: RenderedReport,
    pub confusion: ConfusionMatrix,
    pub confusion_csv: String,
    pub warnings: Vec<String>,
}

/// Encoded evaluation set: a bundle's test split, or every row of a CSV file.
struct EvalSet {
    data: Dataset,
    indices: Vec<usize>,
    warnings: Vec<String>,
}

fn eval_set(model: &TrainedModel, path: &Path, columns: &CsvColumns) -> Result<EvalSet, CliError> {
    let mut warnings = Vec::new();
    if path.is_dir() {
        let bundle = Bundle::read(path)?;
        if bundle.classes() != &model.classes {
            return Err(CliError::Input(format!(
                "class set mismatch: model has {:?}, data has {:?}",
                model.classes.names(),
                bundle.classes().names()
            )));
        }
        if bundle.vocabulary.fingerprint() != model.vocabulary.fingerprint() {
            warnings.push("vocabulary fingerprint differs between model and bundle; token ids may not line up".into());
        }
        if bundle.manifest.sequence != model.sequence {
            return Err(CliError::Input(
                "bundle sequence settings differ from the model's".into(),
            ));
        }
        let indices = bundle.split.test.clone();
        return Ok(EvalSet {
            data: bundle.dataset(),
            indices,
            warnings,
        });
    }
    let load = load_csv(path, &columns.narrative, &columns.label)?;
    let tables = tables_for(model, &mut warnings);
    let labels = load
        .records
        .iter()
        .map(|r| model.classes.index_of(&r.label))
        .collect::<Result<Vec<_>, _>>()?;
    let sequences = load
        .records
        .iter()
        .map(|r| {
            encode_sequence(
                &clean_text(&r.narrative, &tables),
                &model.vocabulary,
                &model.sequence,
            )
        })
        .collect();
    let data = Dataset::new(sequences, labels, model.classes.len())?;
    let indices = (0..data.len()).collect();
    Ok(EvalSet {
        data,
        indices,
        warnings,
    })
}

fn tables_for(model: &TrainedModel, warnings: &mut Vec<String>) -> NormalizationTables {
    if model.tables_version != TABLES_VERSION {
        warnings.push(format!(
            "model was prepared with normalization tables {:?}, using bundled {TABLES_VERSION:?}",
            model.tables_version
        ));
    }
    NormalizationTables::bundled()
}

fn evaluate_model(
    model: &TrainedModel,
    set: &EvalSet,
) -> Result<(EvalReport, ConfusionMatrix), CliError> {
    if set.indices.is_empty() {
        return Err(CliError::Input("no records to evaluate".into()));
    }
    set.data.check_compatible(&model.model.config)?;
    let preds = predict_indices(&model.model, &set.data, &set.indices)?;
    let truths: Vec<usize> = set.indices.iter().map(|&i| set.data.labels[i]).collect();
    let cm = confusion_matrix(&truths, &preds, model.classes.names())?;
    Ok((EvalReport::from_confusion(&cm)?, cm))
}

/// Report and confusion matrix on a bundle's test split (or a whole CSV).
/// When `out_dir` is given, writes `report.txt`, `report.json` and `confusion.csv` there.
pub fn cmd_evaluate(
    model_path: &Path,
    data: &Path,
    columns: &CsvColumns,
    out_dir: Option<&Path>,
) -> Result<EvaluateOutput, CliError> {
    let model = TrainedModel::load(model_path)?;
    let set = eval_set(&model, data, columns)?;
    let (report, confusion) = evaluate_model(&model, &set)?;
    let rendered = render_report(&report)?;
    let mut csv = Vec::new();
    confusion.write_csv(&mut csv)?;
    let confusion_csv = String::from_utf8(csv).expect("csv output is UTF-8");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, body) in [
            ("report.txt", &rendered.text),
            ("report.json", &rendered.json),
            ("confusion.csv", &confusion_csv),
        ] {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
        }
    }
    Ok(EvaluateOutput {
        report,
        rendered,
        confusion,
        confusion_csv,
        warnings: set.warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProbability {
    pub class: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub index: usize,
    pub class: String,
    pub probabilities: Vec<ClassProbability>,
    /// Nothing survived cleaning; the model saw an all-PAD sequence.
    pub empty_input: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredictInput {
    Texts(Vec<String>),
    Csv { path: PathBuf, column: String },
}

pub fn cmd_predict(
    model_path: &Path,
    input: &PredictInput,
) -> Result<(Vec<Prediction>, Vec<String>), CliError> {
    let model = TrainedModel::load(model_path)?;
    let texts: Vec<String> = match input {
        PredictInput::Texts(t) => t.clone(),
        PredictInput::Csv { path, column } => crate::corpus::read_narratives(path, column)?,
    };
    let mut warnings = Vec::new();
    let tables = tables_for(&model, &mut warnings);
    let mut out = Vec::with_capacity(texts.len());
    for (index, text) in texts.iter().enumerate() {
        let tokens = clean_text(text, &tables);
        let seq = encode_sequence(&tokens, &model.vocabulary, &model.sequence);
        let probs = model.model.probabilities(&seq)?;
        out.push(Prediction {
            index,
            class: model.classes.name(predict(probs.view())).to_string(),
            probabilities: model
                .classes
                .names()
                .iter()
                .zip(probs.iter())
                .map(|(c, &p)| ClassProbability {
                    class: c.clone(),
                    probability: p,
                })
                .collect(),
            empty_input: tokens.is_empty(),
        });
    }
    Ok((out, warnings))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOutput {
    pub rows: Vec<ComparisonRow>,
    pub csv: String,
    pub table: String,
}

/// Evaluates each model on the shared test split and tabulates weighted
/// precision/recall/f1 and accuracy.
pub fn cmd_compare(
    model_paths: &[PathBuf],
    data: &Path,
    columns: &CsvColumns,
) -> Result<CompareOutput, CliError> {
    if model_paths.is_empty() {
        return Err(CliError::Input("compare needs at least one model".into()));
    }
    let models = model_paths
        .iter()
        .map(|p| TrainedModel::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(m) = models.iter().find(|m| m.classes != models[0].classes) {
        return Err(CliError::Input(format!(
            "models disagree on classes: {:?} vs {:?}",
            models[0].classes.names(),
            m.classes.names()
        )));
    }
    let mut reports = Vec::with_capacity(models.len());
    for (path, m) in model_paths.iter().zip(&models) {
        let set = eval_set(m, data, columns)?;
        let (report, _) = evaluate_model(m, &set)?;
        let kind = m.model.config.cell_kind.display_name();
        let clash = models
            .iter()
            .filter(|o| o.model.config.cell_kind == m.model.config.cell_kind)
            .count()
            > 1;
        let name = if clash {
            format!(
                "{kind} ({})",
                path.file_stem().unwrap_or_default().to_string_lossy()
            )
        } else {
            kind.to_string()
        };
        reports.push((name, report));
    }
    let rows = compare_models(&reports);
    let mut buf = Vec::new();
    write_comparison_csv(&mut buf, &rows)?;
    Ok(CompareOutput {
        csv: String::from_utf8(buf).expect("csv output is UTF-8"),
        table: render_comparison(&rows),
        rows,
    })
}
