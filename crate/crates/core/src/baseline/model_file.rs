//! Model files: a versioned JSON dump of vocabulary, weights, biases, seed,
//! and hyperparameters. Floats are written in shortest round-trip form, so
//! loading reproduces the model bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Hyperparameters, LinearModel, Tokenizer, Vocabulary};
use crate::score::Score;

pub const MODEL_FORMAT: &str = "sentibias-linear-svm";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    tokenizer: Tokenizer,
    seed: u64,
    hyperparameters: Hyperparameters,
    vocabulary: Vec<String>,
    biases: Vec<f64>,
    /// One row per class, 1 through 5.
    weights: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model file: {0}")]
    Unsupported(String),
    #[error("inconsistent model file: {0}")]
    Inconsistent(String),
}

pub fn save_model<W: Write>(model: &LinearModel, mut w: W) -> Result<(), ModelFileError> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_FORMAT_VERSION,
        tokenizer: model.tokenizer(),
        seed: model.seed,
        hyperparameters: model.hyper,
        vocabulary: model.vocab.tokens().to_vec(),
        biases: model.biases.to_vec(),
        weights: Score::all().map(|c| model.class_weights(c).to_vec()).collect(),
    };
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn load_model<R: Read>(r: R) -> Result<LinearModel, ModelFileError> {
    let file: ModelFile = serde_json::from_reader(r)?;
    if file.format != MODEL_FORMAT {
        return Err(ModelFileError::Unsupported(format!("format `{}`", file.format)));
    }
    if file.version != MODEL_FORMAT_VERSION {
        return Err(ModelFileError::Unsupported(format!("version {}", file.version)));
    }
    let vocab = Vocabulary::from_tokens(file.tokenizer, file.vocabulary).map_err(ModelFileError::Inconsistent)?;
    let biases: [f64; Score::CLASSES] = file
        .biases
        .try_into()
        .map_err(|b: Vec<f64>| ModelFileError::Inconsistent(format!("{} biases, expected 5", b.len())))?;
    if file.weights.len() != Score::CLASSES {
        return Err(ModelFileError::Inconsistent(format!(
            "{} weight rows, expected 5",
            file.weights.len()
        )));
    }
    let mut weights = Vec::with_capacity(Score::CLASSES * vocab.len());
    for row in &file.weights {
        if row.len() != vocab.len() {
            return Err(ModelFileError::Inconsistent(format!(
                "weight row of length {} for a vocabulary of {}",
                row.len(),
                vocab.len()
            )));
        }
        weights.extend_from_slice(row);
    }
    Ok(LinearModel {
        vocab,
        weights,
        biases,
        seed: file.seed,
        hyper: file.hyperparameters,
    })
}

pub const ENSEMBLE_FORMAT: &str = "sentibias-ensemble";

/// Lists the member model files of an ensemble with the hash of each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleManifest {
    pub format: String,
    pub version: u32,
    pub tokenizer: Tokenizer,
    pub members: Vec<ManifestMember>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestMember {
    pub seed: u64,
    /// Path relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

impl EnsembleManifest {
    pub fn new(tokenizer: Tokenizer, members: Vec<ManifestMember>) -> EnsembleManifest {
        EnsembleManifest {
            format: ENSEMBLE_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            tokenizer,
            members,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<EnsembleManifest, ModelFileError> {
        let m: EnsembleManifest = serde_json::from_str(s)?;
        if m.format != ENSEMBLE_FORMAT {
            return Err(ModelFileError::Unsupported(format!("format `{}`", m.format)));
        }
        if m.version != MODEL_FORMAT_VERSION {
            return Err(ModelFileError::Unsupported(format!("version {}", m.version)));
        }
        Ok(m)
    }
}
