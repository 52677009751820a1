use serde_json::{json, Value};

use super::ExportError;
use crate::blueprint::Blueprint;
use crate::grid_io::PowerGridModel;
use crate::model::InfrastructureModel;
use crate::sha256_hex;

pub const MODEL_FORMAT: &str = "sgim-model";
pub const MODEL_VERSION: u32 = 1;

/// Versioned, checksummed JSON document holding the whole model.
pub fn save_model(model: &InfrastructureModel) -> String {
    let body = serde_json::to_value(model).expect("model serializes");
    let doc = json!({
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "checksum": sha256_hex(body.to_string().as_bytes()),
        "model": body,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
    s.push('\n');
    s
}

pub fn load_model(doc: &str) -> Result<InfrastructureModel, ExportError> {
    let malformed = |e: serde_json::Error| ExportError::Malformed(e.to_string());
    let mut v: Value = serde_json::from_str(doc).map_err(malformed)?;
    let format = v.get("format").and_then(Value::as_str).unwrap_or_default();
    if format != MODEL_FORMAT {
        return Err(ExportError::Format {
            expected: MODEL_FORMAT.into(),
            found: format.into(),
        });
    }
    let version = v
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ExportError::Malformed("missing version".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(ExportError::Version {
            expected: MODEL_VERSION,
            found: version,
        });
    }
    let checksum = v
        .get("checksum")
        .and_then(Value::as_str)
        .ok_or_else(|| ExportError::Malformed("missing checksum".into()))?
        .to_string();
    let body = v
        .get_mut("model")
        .map(Value::take)
        .ok_or_else(|| ExportError::Malformed("missing model".into()))?;
    if sha256_hex(body.to_string().as_bytes()) != checksum {
        return Err(ExportError::Checksum);
    }
    serde_json::from_value(body).map_err(malformed)
}

/// Warnings for fingerprints that do not match the given inputs.
pub fn check_fingerprints(
    model: &InfrastructureModel,
    grid: &PowerGridModel,
    bp: &Blueprint,
) -> Vec<String> {
    let mut warnings = Vec::new();
    if model.grid_fingerprint != grid.fingerprint() {
        warnings.push("grid fingerprint does not match the model".to_string());
    }
    if model.blueprint_fingerprint != bp.fingerprint() {
        warnings.push("blueprint fingerprint does not match the model".to_string());
    }
    warnings
}
