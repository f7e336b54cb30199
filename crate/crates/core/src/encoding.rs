//! Architecture records and their feature encodings.
//!
//! Five encodings are supported:
//!
//! | kind     | features                                          |
//! |----------|---------------------------------------------------|
//! | `Vec`    | topology vector (adjacency bits, op indices), raw |
//! | `Zcp`    | min-max scaled zero-cost-proxy scores             |
//! | `Hwl`    | min-max scaled latencies on reference devices     |
//! | `ZcpVec` | `Zcp` followed by `Vec`                           |
//! | `HwlVec` | `Hwl` followed by `Vec`                           |
//!
//! `Zcp` and `Hwl` have the same length in every search space, which is what
//! makes cross-space transfer possible.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower and upper clip applied to scaled metrics.
pub const CLIP_LOW: f64 = -0.5;
pub const CLIP_HIGH: f64 = 1.5;

/// The twelve proxies of NAS-Bench-Suite-Zero, in their canonical order.
pub const STANDARD_PROXIES: [&str; 12] = [
    "fisher",
    "flops",
    "grad-norm",
    "grasp",
    "l2-norm",
    "jacov",
    "nwot",
    "params",
    "plain",
    "snip",
    "synflow",
    "zen-score",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArchitectureRecord {
    pub arch_id: String,
    pub space_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vec: Option<Vec<i64>>,
    #[serde(default)]
    pub zcp: BTreeMap<String, f64>,
    /// Milliseconds, keyed by device id.
    #[serde(default, rename = "latency")]
    pub latencies: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl ArchitectureRecord {
    pub fn new(arch_id: impl Into<String>, space_id: impl Into<String>) -> Self {
        Self {
            arch_id: arch_id.into(),
            space_id: space_id.into(),
            ..Self::default()
        }
    }

    pub fn latency(&self, device: &str) -> Option<f64> {
        self.latencies.get(device).copied()
    }
}

/// Layout of the topology vector for one search space.
///
/// The vector holds the row-major upper triangle of the `node_count ×
/// node_count` adjacency matrix (bits), followed by one operation index per
/// remaining position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSchema {
    pub space_id: String,
    pub node_count: usize,
    pub ops: Vec<String>,
    pub vec_len: usize,
}

impl SpaceSchema {
    pub fn adjacency_len(&self) -> usize {
        self.node_count * self.node_count.saturating_sub(1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.vec_len < self.adjacency_len() {
            return Err(Error::Argument(format!(
                "schema `{}`: vec_len {} shorter than adjacency triangle {}",
                self.space_id,
                self.vec_len,
                self.adjacency_len()
            )));
        }
        if self.vec_len > self.adjacency_len() && self.ops.is_empty() {
            return Err(Error::Argument(format!(
                "schema `{}` declares op positions but no op vocabulary",
                self.space_id
            )));
        }
        Ok(())
    }

    /// Checks a topology vector against this layout.
    pub fn check_vec(&self, arch_id: &str, vec: &[i64]) -> Result<()> {
        if vec.len() != self.vec_len {
            return Err(Error::Shape {
                context: "topology vector",
                expected: self.vec_len,
                found: vec.len(),
            });
        }
        let adj = self.adjacency_len();
        for (i, &v) in vec.iter().enumerate() {
            let ok = if i < adj {
                v == 0 || v == 1
            } else {
                v >= 0 && (v as usize) < self.ops.len()
            };
            if !ok {
                return Err(Error::Range {
                    context: format!(
                        "`{arch_id}` vec[{i}] = {v} invalid for schema `{}`",
                        self.space_id
                    ),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    Vec,
    Zcp,
    Hwl,
    ZcpVec,
    HwlVec,
}

impl EncodingKind {
    pub fn uses_vec(self) -> bool {
        matches!(self, Self::Vec | Self::ZcpVec | Self::HwlVec)
    }

    pub fn uses_proxies(self) -> bool {
        matches!(self, Self::Zcp | Self::ZcpVec)
    }

    pub fn uses_latencies(self) -> bool {
        matches!(self, Self::Hwl | Self::HwlVec)
    }

    /// True for encodings whose length does not depend on the search space.
    pub fn is_space_independent(self) -> bool {
        matches!(self, Self::Zcp | Self::Hwl)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Vec => "vec",
            Self::Zcp => "zcp",
            Self::Hwl => "hwl",
            Self::ZcpVec => "zcpvec",
            Self::HwlVec => "hwlvec",
        }
    }
}

impl core::str::FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vec" => Ok(Self::Vec),
            "zcp" => Ok(Self::Zcp),
            "hwl" => Ok(Self::Hwl),
            "zcpvec" => Ok(Self::ZcpVec),
            "hwlvec" => Ok(Self::HwlVec),
            other => Err(Error::Argument(format!("unknown encoding `{other}`"))),
        }
    }
}

/// An encoding kind plus the ordered metric names it reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMode {
    pub kind: EncodingKind,
    #[serde(default)]
    pub proxies: Vec<String>,
    #[serde(default)]
    pub devices: Vec<String>,
}

impl EncodingMode {
    pub fn new(kind: EncodingKind, proxies: Vec<String>, devices: Vec<String>) -> Result<Self> {
        let mode = Self {
            kind,
            proxies,
            devices,
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn vec() -> Self {
        Self {
            kind: EncodingKind::Vec,
            proxies: Vec::new(),
            devices: Vec::new(),
        }
    }

    pub fn zcp<S: ToString>(proxies: &[S]) -> Result<Self> {
        Self::new(EncodingKind::Zcp, names(proxies), Vec::new())
    }

    pub fn hwl<S: ToString>(devices: &[S]) -> Result<Self> {
        Self::new(EncodingKind::Hwl, Vec::new(), names(devices))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_proxies() && self.proxies.is_empty() {
            return Err(Error::Argument(format!(
                "{} encoding needs a non-empty proxy list",
                self.kind.name()
            )));
        }
        if self.kind.uses_latencies() && self.devices.is_empty() {
            return Err(Error::Argument(format!(
                "{} encoding needs a non-empty reference device list",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Names of the scaled metric features, in encoding order.
    pub fn metric_names(&self) -> &[String] {
        if self.kind.uses_proxies() {
            &self.proxies
        } else if self.kind.uses_latencies() {
            &self.devices
        } else {
            &[]
        }
    }

    fn metric_of(&self, record: &ArchitectureRecord, name: &str) -> Option<f64> {
        if self.kind.uses_proxies() {
            record.zcp.get(name).copied()
        } else {
            record.latencies.get(name).copied()
        }
    }
}

fn names<S: ToString>(items: &[S]) -> Vec<String> {
    items.iter().map(ToString::to_string).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Min-max scaling; a constant feature maps to 0.5.
    pub fn scale(&self, value: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (value - self.min) / span
        } else {
            0.5
        }
    }

    pub fn unscale(&self, scaled: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            self.min + scaled * span
        } else {
            self.min
        }
    }

    /// Extrema of `values`; `None` when empty or non-finite.
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut range: Option<Self> = None;
        for v in values {
            if !v.is_finite() {
                return None;
            }
            range = Some(match range {
                None => Self { min: v, max: v },
                Some(r) => Self {
                    min: r.min.min(v),
                    max: r.max.max(v),
                },
            });
        }
        range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Any absent metric is an ingestion error.
    #[default]
    Error,
    /// Absent metrics take the reference-set mean of that feature.
    ImputeMean,
}

/// Per-feature min-max ranges fitted on a reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub kind: EncodingKind,
    pub features: Vec<String>,
    pub ranges: Vec<FeatureRange>,
    pub means: Vec<f64>,
    pub missing: MissingPolicy,
}

impl Normalizer {
    fn fitted_for(&self, mode: &EncodingMode) -> Result<()> {
        if self.features.as_slice() != mode.metric_names()
            || self.ranges.len() != self.features.len()
        {
            return Err(Error::State(format!(
                "normalizer was fitted for features {:?}, encoding expects {:?}",
                self.features,
                mode.metric_names()
            )));
        }
        Ok(())
    }
}

/// Fits min/max (and means, for imputation) of each metric the mode reads.
pub fn fit_normalizer<'a, I>(
    records: I,
    mode: &EncodingMode,
    missing: MissingPolicy,
) -> Result<Normalizer>
where
    I: IntoIterator<Item = &'a ArchitectureRecord>,
{
    mode.validate()?;
    let records: Vec<&ArchitectureRecord> = records.into_iter().collect();
    if records.len() < 2 {
        return Err(Error::Argument(format!(
            "normalizer needs at least 2 reference records, got {}",
            records.len()
        )));
    }
    let features = mode.metric_names().to_vec();
    let mut ranges = Vec::with_capacity(features.len());
    let mut means = Vec::with_capacity(features.len());
    for name in &features {
        let mut values = Vec::with_capacity(records.len());
        for r in &records {
            match mode.metric_of(r, name) {
                Some(v) if v.is_finite() => values.push(v),
                Some(_) => {
                    return Err(Error::Numeric {
                        context: format!("`{}` feature `{name}`", r.arch_id),
                        index: values.len(),
                    })
                }
                None if missing == MissingPolicy::ImputeMean => {}
                None => {
                    return Err(Error::Ingestion {
                        arch_id: r.arch_id.clone(),
                        feature: name.clone(),
                    })
                }
            }
        }
        let Some(range) = FeatureRange::fit(values.iter().copied()) else {
            return Err(Error::Ingestion {
                arch_id: records[0].arch_id.clone(),
                feature: name.clone(),
            });
        };
        ranges.push(range);
        means.push(values.iter().sum::<f64>() / values.len() as f64);
    }
    Ok(Normalizer {
        kind: mode.kind,
        features,
        ranges,
        means,
        missing,
    })
}

/// Encodes `record` into `out` (cleared first).
pub fn encode_into(
    record: &ArchitectureRecord,
    mode: &EncodingMode,
    norm: &Normalizer,
    out: &mut Vec<f64>,
) -> Result<()> {
    norm.fitted_for(mode)?;
    out.clear();
    for (i, (name, range)) in norm.features.iter().zip(&norm.ranges).enumerate() {
        let raw = match mode.metric_of(record, name) {
            Some(v) => v,
            None if norm.missing == MissingPolicy::ImputeMean => norm.means[i],
            None => {
                return Err(Error::Ingestion {
                    arch_id: record.arch_id.clone(),
                    feature: name.clone(),
                })
            }
        };
        if !raw.is_finite() {
            return Err(Error::Numeric {
                context: format!("`{}` feature `{name}`", record.arch_id),
                index: i,
            });
        }
        out.push(range.scale(raw).clamp(CLIP_LOW, CLIP_HIGH));
    }
    if mode.kind.uses_vec() {
        let Some(vec) = &record.vec else {
            return Err(Error::Ingestion {
                arch_id: record.arch_id.clone(),
                feature: "vec".into(),
            });
        };
        out.extend(vec.iter().map(|&v| v as f64));
    }
    Ok(())
}

/// Feature vector for `record`: scaled metrics first, then the raw topology
/// vector for Vec-bearing kinds.
pub fn encode(
    record: &ArchitectureRecord,
    mode: &EncodingMode,
    norm: &Normalizer,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    encode_into(record, mode, norm, &mut out)?;
    Ok(out)
}

/// Length of the encoding. Vec-bearing kinds need the space's topology length.
pub fn encoding_dim(mode: &EncodingMode, vec_len: Option<usize>) -> Result<usize> {
    let metrics = mode.metric_names().len();
    if mode.kind.uses_vec() {
        let Some(len) = vec_len else {
            return Err(Error::Argument(format!(
                "{} encoding needs a space schema",
                mode.kind.name()
            )));
        };
        Ok(metrics + len)
    } else {
        Ok(metrics)
    }
}
