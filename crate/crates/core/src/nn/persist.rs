//! JSON model files.
//!
//! ```text
//! {"format": "ricsim-model", "version": 1,
//!  "config": {...}, "scaler": {"min": .., "max": ..},
//!  "layout": [{"name": "rnn0/kernel", "shape": [1, 384]}, ...],
//!  "weights": [...]}
//! ```
//!
//! `weights` is the flat parameter vector: for each recurrent layer its
//! kernel, recurrent kernel and bias (row-major), then the dense kernel and
//! bias. Floats are written in shortest round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::{RecurrentModel, Scaler, TensorSpec};
use super::NnError;

pub const FORMAT: &str = "ricsim-model";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: ModelConfig,
    scaler: Scaler,
    layout: Vec<TensorSpec>,
    weights: Vec<f64>,
}

pub fn to_json(model: &RecurrentModel) -> String {
    let file = ModelFile {
        format: FORMAT.into(),
        version: VERSION,
        config: model.config().clone(),
        scaler: model.scaler(),
        layout: model.layout(),
        weights: model.params().to_vec(),
    };
    serde_json::to_string(&file).expect("model serializes")
}

pub fn from_json(text: &str) -> Result<RecurrentModel, NnError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| NnError::Format(e.to_string()))?;
    if file.format != FORMAT {
        return Err(NnError::Format(format!("unexpected format tag `{}`", file.format)));
    }
    if file.version != VERSION {
        return Err(NnError::Format(format!("unsupported version {}", file.version)));
    }
    let model = RecurrentModel::from_parts(file.config, file.scaler, file.weights)?;
    if model.layout() != file.layout {
        return Err(NnError::Format("layout does not match config".into()));
    }
    Ok(model)
}

pub fn save(model: &RecurrentModel, path: &Path) -> Result<(), NnError> {
    std::fs::write(path, to_json(model)).map_err(|e| NnError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<RecurrentModel, NnError> {
    let text = std::fs::read_to_string(path).map_err(|e| NnError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}
