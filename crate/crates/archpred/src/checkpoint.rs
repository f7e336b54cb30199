//! Versioned JSON dump of a trained predictor.

use std::fs;
use std::path::Path;

use archpred_core::{BenchmarkDataset, EncodingKind, PredictorModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::write_atomic;

pub const FORMAT: &str = "archpred-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    format: String,
    version: u32,
    tool_version: String,
    /// Hash of the experiment config that produced the model, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_sha256: Option<String>,
    model: PredictorModel,
}

/// A loaded checkpoint with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub tool_version: String,
    pub config_sha256: Option<String>,
    pub model: PredictorModel,
}

pub fn save_checkpoint(
    path: &Path,
    model: &PredictorModel,
    config_sha256: Option<&str>,
) -> Result<()> {
    write_atomic(path, &checkpoint_bytes(model, config_sha256)?)
}

pub fn checkpoint_bytes(model: &PredictorModel, config_sha256: Option<&str>) -> Result<Vec<u8>> {
    model.check_dims()?;
    let env = Envelope {
        format: FORMAT.into(),
        version: FORMAT_VERSION,
        tool_version: crate::output::VERSION.into(),
        config_sha256: config_sha256.map(String::from),
        model: model.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&env).map_err(|e| Error::Checkpoint {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn load_checkpoint(path: &Path) -> Result<PredictorModel> {
    read_checkpoint(path).map(|c| c.model)
}

/// Like [`load_checkpoint`], keeping the provenance fields.
pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bad = |message: String| Error::Checkpoint {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    match (
        value.get("format").and_then(|v| v.as_str()),
        value.get("version").and_then(|v| v.as_u64()),
    ) {
        (Some(FORMAT), Some(v)) if v == u64::from(FORMAT_VERSION) => {}
        (Some(FORMAT), Some(v)) => return Err(bad(format!("unsupported version {v}"))),
        _ => return Err(bad("not an archpred checkpoint".into())),
    }
    let env: Envelope = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
    env.model.check_dims().map_err(|e| bad(e.to_string()))?;
    Ok(Checkpoint {
        tool_version: env.tool_version,
        config_sha256: env.config_sha256,
        model: env.model,
    })
}

/// Checks that every record of `dataset` can be encoded for `model`.
pub fn check_dataset(model: &PredictorModel, dataset: &BenchmarkDataset) -> Result<()> {
    let mut problems = Vec::new();
    let kind = model.mode.kind;
    if kind.uses_vec() && dataset.vec_len() != model.vec_len {
        problems.push(format!(
            "topology vector length {:?} differs from the model's {:?}",
            dataset.vec_len(),
            model.vec_len
        ));
    }
    let have: &[String] = match kind {
        EncodingKind::Zcp | EncodingKind::ZcpVec => dataset.proxies(),
        EncodingKind::Hwl | EncodingKind::HwlVec => dataset.devices(),
        EncodingKind::Vec => &[],
    };
    let missing: Vec<&String> = model
        .mode
        .metric_names()
        .iter()
        .filter(|m| !have.contains(m))
        .collect();
    if !missing.is_empty() {
        problems.push(format!("dataset lacks input metrics {missing:?}"));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Incompatible(problems.join("; ")))
    }
}
