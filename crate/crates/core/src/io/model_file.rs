//! Fitted models as versioned JSON documents, written and read losslessly.

use super::{atomic_write, read_text};
use crate::calibrators::CalibratorModel;
use crate::error::{CalibError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    version: u32,
    model: CalibratorModel,
}

pub fn model_to_json(model: &CalibratorModel) -> Result<String> {
    let doc = ModelDocument { version: MODEL_FORMAT_VERSION, model: model.clone() };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CalibError::Io(format!("encoding model: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_json(text: &str) -> Result<CalibratorModel> {
    let doc: ModelDocument = serde_json::from_str(text)
        .map_err(|e| CalibError::Config(format!("bad model file: {e}")))?;
    if doc.version != MODEL_FORMAT_VERSION {
        return Err(CalibError::Config(format!(
            "unsupported model file version {} (this build reads {})",
            doc.version, MODEL_FORMAT_VERSION
        )));
    }
    Ok(doc.model)
}

pub fn save_model(path: &Path, model: &CalibratorModel) -> Result<()> {
    atomic_write(path, model_to_json(model)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<CalibratorModel> {
    let text = read_text(path)?;
    model_from_json(&text).map_err(|e| CalibError::Config(format!("{}: {e}", path.display())))
}
