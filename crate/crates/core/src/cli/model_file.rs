use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::corpus::{ClassSet, SequenceConfig, Vocabulary};
use crate::recurrent::{ModelConfig, NamedTensor, Parameters, RecurrentClassifier};
use crate::training::TrainConfig;

pub const MODEL_FORMAT_VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub data_fingerprint: String,
    pub epochs: usize,
    pub train_config: TrainConfig,
}

/// Everything needed to reproduce predictions: architecture, class order,
/// text pipeline settings and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub classes: ClassSet,
    pub sequence: SequenceConfig,
    pub tables_version: String,
    pub vocabulary: Vocabulary,
    pub model: RecurrentClassifier,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: String,
    config: ModelConfig,
    /// Width of the classifier head's input (H, or 2H for BLSTM).
    head_input_dim: usize,
    classes: ClassSet,
    sequence: SequenceConfig,
    tables_version: String,
    vocabulary: Vocabulary,
    parameters: Vec<NamedTensor>,
    provenance: Provenance,
}

fn major(v: &str) -> &str {
    v.split('.').next().unwrap_or(v)
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String, CliError> {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION.into(),
            config: self.model.config.clone(),
            head_input_dim: self.model.config.feature_dim(),
            classes: self.classes.clone(),
            sequence: self.sequence,
            tables_version: self.tables_version.clone(),
            vocabulary: self.vocabulary.clone(),
            parameters: self.model.params.to_named(),
            provenance: self.provenance.clone(),
        };
        let mut s =
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Input(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("model file: {e}")))?;
        let version = v
            .get("format_version")
            .and_then(|x| x.as_str())
            .unwrap_or("");
        if major(version) != major(MODEL_FORMAT_VERSION) {
            return Err(CliError::Input(format!(
                "unsupported model format version {version:?}"
            )));
        }
        let doc: ModelDocument =
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("model file: {e}")))?;
        doc.config.validate()?;
        let classes = ClassSet::new(doc.classes.names().to_vec())?;
        if classes.len() != doc.config.n_classes {
            return Err(CliError::Input(format!(
                "model lists {} classes but is configured for {}",
                classes.len(),
                doc.config.n_classes
            )));
        }
        if doc.sequence.seq_len != doc.config.seq_len {
            return Err(CliError::Input(
                "sequence length disagrees with model configuration".into(),
            ));
        }
        if doc.vocabulary.id_bound() > doc.config.embedding_rows() {
            return Err(CliError::Input(
                "vocabulary larger than the embedding table".into(),
            ));
        }
        let params = Parameters::from_named(&doc.config, &doc.parameters)?;
        Ok(Self {
            classes,
            sequence: doc.sequence,
            tables_version: doc.tables_version,
            vocabulary: doc.vocabulary,
            model: RecurrentClassifier {
                config: doc.config,
                params,
            },
            provenance: doc.provenance,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, self.to_json()?).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TABLES_VERSION;
    use crate::recurrent::CellKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(kind: CellKind) -> TrainedModel {
        let cfg = ModelConfig::new(kind, 6, 3, 2, 4, 5);
        let model = RecurrentClassifier::new(cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        TrainedModel {
            classes: ClassSet::damage_levels(),
            sequence: SequenceConfig::new(5),
            tables_version: TABLES_VERSION.into(),
            vocabulary: Vocabulary::from_ranked(vec!["a".into(), "b".into()], 6),
            model,
            provenance: Provenance {
                seed: 3,
                data_fingerprint: "x".into(),
                epochs: 1,
                train_config: TrainConfig::default(),
            },
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        for kind in CellKind::ALL {
            let m = sample(kind);
            let text = m.to_json().unwrap();
            let back = TrainedModel::from_json(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_json().unwrap(), text);
        }
    }

    #[test]
    fn head_dim_recorded() {
        let v: serde_json::Value =
            serde_json::from_str(&sample(CellKind::Blstm).to_json().unwrap()).unwrap();
        assert_eq!(v["head_input_dim"], 4);
    }

    #[test]
    fn unknown_major_rejected() {
        let text = sample(CellKind::Srnn)
            .to_json()
            .unwrap()
            .replacen("\"1.0\"", "\"2.0\"", 1);
        let err = TrainedModel::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
        let minor = sample(CellKind::Srnn)
            .to_json()
            .unwrap()
            .replacen("\"1.0\"", "\"1.7\"", 1);
        assert!(TrainedModel::from_json(&minor).is_ok());
    }
}
