//! JSON checkpoints. Floats are written with round-trip precision, so a
//! loaded model predicts bit-identically to the saved one.

use serde::{Deserialize, Serialize};

use super::model::JitVdModel;
use super::NeuralError;

pub const CHECKPOINT_FORMAT: &str = "ctgvd-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Container {
    format: String,
    version: u32,
    model: JitVdModel,
}

pub fn save_checkpoint(model: &JitVdModel) -> String {
    let c = Container {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    };
    serde_json::to_string(&c).expect("model serializes")
}

pub fn load_checkpoint(text: &str) -> Result<JitVdModel, NeuralError> {
    let c: Container = serde_json::from_str(text).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    if c.format != CHECKPOINT_FORMAT {
        return Err(NeuralError::Checkpoint(format!("unknown format {:?}", c.format)));
    }
    if c.version != CHECKPOINT_VERSION {
        return Err(NeuralError::Checkpoint(format!("unsupported version {}", c.version)));
    }
    if !c.model.params.all_finite() {
        return Err(NeuralError::Checkpoint("non-finite parameter".into()));
    }
    if c.model.params.embeddings.rows != c.model.vocab.len() {
        return Err(NeuralError::Checkpoint("embedding rows do not match vocabulary".into()));
    }
    Ok(c.model)
}
