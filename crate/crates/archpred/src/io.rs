//! Dataset, schema and synthetic-spec files.
//!
//! Datasets are JSON Lines: one architecture per line, blank lines and lines
//! starting with `#` ignored. Latencies are milliseconds; files in other
//! units are loaded with a multiplier.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use archpred_core::{ArchitectureRecord, BenchmarkDataset, SpaceSchema};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::write_atomic;

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    arch_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vec: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    zcp: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    latency: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadOptions {
    /// Space id when neither the schema nor the records name one; defaults
    /// to the file stem.
    #[serde(default)]
    pub space_id: Option<String>,
    /// Multiplier bringing latencies to milliseconds (1000 for seconds).
    #[serde(default = "one")]
    pub unit_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            space_id: None,
            unit_multiplier: 1.0,
        }
    }
}

/// Parses a dataset file; see the module docs for the format.
pub fn load_dataset(
    path: &Path,
    schema: Option<SpaceSchema>,
    options: &LoadOptions,
) -> Result<BenchmarkDataset> {
    let m = options.unit_multiplier;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::config(format!(
            "unit_multiplier must be positive, got {m}"
        )));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut space_ids: Vec<(usize, String)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: LineRecord = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        if let Some(&first) = seen.get(&rec.arch_id) {
            return Err(Error::Duplicate {
                path: path.to_path_buf(),
                arch_id: rec.arch_id,
                line: lineno,
                first,
            });
        }
        seen.insert(rec.arch_id.clone(), lineno);
        if let Some(s) = &rec.space_id {
            space_ids.push((lineno, s.clone()));
        }
        records.push(ArchitectureRecord {
            arch_id: rec.arch_id,
            space_id: rec.space_id.unwrap_or_default(),
            vec: rec.vec,
            zcp: rec.zcp,
            latencies: rec.latency.into_iter().map(|(d, v)| (d, v * m)).collect(),
            accuracy: rec.accuracy,
        });
    }
    let space_id = schema
        .as_ref()
        .map(|s| s.space_id.clone())
        .or_else(|| space_ids.first().map(|(_, s)| s.clone()))
        .or_else(|| options.space_id.clone())
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
    if let Some((line, other)) = space_ids.iter().find(|(_, s)| *s != space_id) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            message: format!("record belongs to space `{other}`, dataset is `{space_id}`"),
        });
    }
    let dataset = BenchmarkDataset::new(space_id, schema, records)?;
    if !dataset.partial_records().is_empty() {
        log::info!(
            "{}: {} of {} records lack some devices or proxies",
            path.display(),
            dataset.partial_records().len(),
            dataset.len()
        );
    }
    Ok(dataset)
}

/// Writes `dataset` in the line format, with latencies in milliseconds.
pub fn save_dataset(path: &Path, dataset: &BenchmarkDataset) -> Result<()> {
    write_atomic(path, &dataset_bytes(dataset))
}

pub fn dataset_bytes(dataset: &BenchmarkDataset) -> Vec<u8> {
    let mut buf = Vec::new();
    for r in dataset.records() {
        let line = LineRecord {
            arch_id: r.arch_id.clone(),
            space_id: Some(r.space_id.clone()),
            vec: r.vec.clone(),
            zcp: r.zcp.clone(),
            latency: r.latencies.clone(),
            accuracy: r.accuracy,
        };
        serde_json::to_writer(&mut buf, &line).expect("records serialize");
        buf.push(b'\n');
    }
    buf
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    space_id: String,
    node_count: usize,
    #[serde(default)]
    ops: Vec<String>,
    vec_len: usize,
}

pub fn load_schema(path: &Path) -> Result<SpaceSchema> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SchemaFile = toml::from_str(&text).map_err(|e| toml_error(path, &text, e))?;
    let schema = SpaceSchema {
        space_id: file.space_id,
        node_count: file.node_count,
        ops: file.ops,
        vec_len: file.vec_len,
    };
    schema.validate()?;
    Ok(schema)
}

pub fn save_schema(path: &Path, schema: &SpaceSchema) -> Result<()> {
    write_atomic(path, schema_text(schema).as_bytes())
}

pub fn schema_text(schema: &SpaceSchema) -> String {
    let file = SchemaFile {
        space_id: schema.space_id.clone(),
        node_count: schema.node_count,
        ops: schema.ops.clone(),
        vec_len: schema.vec_len,
    };
    toml::to_string(&file).expect("schema serializes")
}

pub(crate) fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}
