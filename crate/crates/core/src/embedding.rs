//! Hardware device representations: reference-architecture latencies
//! (`Sample`), binary device index (`Index`) and a learnable embedding table
//! (`Table`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{FeatureRange, CLIP_HIGH, CLIP_LOW};
use crate::metrics::spearman_rho;
use crate::tensor::DenseMatrix;
use crate::{Error, Result};

/// Default embedding width.
pub const DEFAULT_EMBEDDING_DIM: usize = 8;
/// Half-width of the uniform initialization of table rows.
pub const TABLE_INIT_SCALE: f64 = 0.1;

/// One learnable row per device; row `i` is `e_i · E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    device_ids: Vec<String>,
    table: DenseMatrix,
    pub trainable: bool,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(Self {
            device_ids: Vec::new(),
            table: DenseMatrix::zeros(0, dim),
            trainable: true,
        })
    }

    /// Rows drawn uniformly from ±[`TABLE_INIT_SCALE`].
    pub fn random<R: Rng + ?Sized>(device_ids: &[String], dim: usize, rng: &mut R) -> Result<Self> {
        let mut table = Self::new(dim)?;
        for id in device_ids {
            let row: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(-TABLE_INIT_SCALE..=TABLE_INIT_SCALE))
                .collect();
            table.register(id, &row)?;
        }
        Ok(table)
    }

    pub fn register(&mut self, device_id: &str, row: &[f64]) -> Result<usize> {
        if self.ordinal(device_id).is_some() {
            return Err(Error::Integrity(format!(
                "device `{device_id}` already registered"
            )));
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                context: format!("embedding row for `{device_id}`"),
                index: i,
            });
        }
        self.table.push_row(row)?;
        self.device_ids.push(device_id.into());
        Ok(self.device_ids.len() - 1)
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn len(&self) -> usize {
        self.device_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.device_ids.is_empty()
    }

    pub fn device_ids(&self) -> &[String] {
        &self.device_ids
    }

    pub fn ordinal(&self, device_id: &str) -> Option<usize> {
        self.device_ids.iter().position(|d| d == device_id)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.table
    }

    pub fn row(&self, ordinal: usize) -> &[f64] {
        self.table.row(ordinal)
    }

    pub fn row_mut(&mut self, ordinal: usize) -> &mut [f64] {
        self.table.row_mut(ordinal)
    }

    /// All rows, row-major.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        self.table.data_mut()
    }

    pub fn lookup(&self, device_id: &str) -> Result<&[f64]> {
        let i = self.ordinal(device_id).ok_or_else(|| Error::Lookup {
            kind: "device",
            id: device_id.into(),
        })?;
        Ok(self.table.row(i))
    }

    pub fn one_hot(&self, device_id: &str) -> Result<Vec<f64>> {
        let i = self.ordinal(device_id).ok_or_else(|| Error::Lookup {
            kind: "device",
            id: device_id.into(),
        })?;
        let mut e = vec![0.0; self.len()];
        e[i] = 1.0;
        Ok(e)
    }
}

/// Big-endian binary expansion of `ordinal` over `width` bits.
pub fn index_embedding(ordinal: usize, width: usize) -> Result<Vec<f64>> {
    if width < usize::BITS as usize && ordinal >> width != 0 {
        return Err(Error::Range {
            context: format!("device ordinal {ordinal} does not fit in {width} bits"),
        });
    }
    Ok((0..width)
        .rev()
        .map(|bit| {
            if bit < usize::BITS as usize && (ordinal >> bit) & 1 == 1 {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Bits needed to index `count` devices, at least one.
pub fn index_width(count: usize) -> usize {
    let mut width = 1;
    while width < usize::BITS as usize && (1usize << width) < count {
        width += 1;
    }
    width
}

/// Per-reference-architecture latency ranges over the training devices.
pub fn fit_sample_ranges(
    device_latencies: &[&BTreeMap<String, f64>],
    reference_archs: &[String],
) -> Result<Vec<FeatureRange>> {
    reference_archs
        .iter()
        .map(|arch| {
            FeatureRange::fit(device_latencies.iter().filter_map(|m| m.get(arch).copied()))
                .ok_or_else(|| Error::Data {
                    context: "reference architecture unmeasured on every training device".into(),
                    missing: vec![arch.clone()],
                })
        })
        .collect()
}

/// Latencies of the reference architectures on one device, in reference
/// order, min-max scaled with the training-device ranges.
pub fn sample_embedding(
    device_latencies: &BTreeMap<String, f64>,
    reference_archs: &[String],
    ranges: &[FeatureRange],
) -> Result<Vec<f64>> {
    if ranges.len() != reference_archs.len() {
        return Err(Error::Shape {
            context: "sample embedding ranges",
            expected: reference_archs.len(),
            found: ranges.len(),
        });
    }
    let missing: Vec<String> = reference_archs
        .iter()
        .filter(|a| !device_latencies.contains_key(*a))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data {
            context: "device lacks reference measurements".into(),
            missing,
        });
    }
    Ok(reference_archs
        .iter()
        .zip(ranges)
        .map(|(a, r)| r.scale(device_latencies[a]).clamp(CLIP_LOW, CLIP_HIGH))
        .collect())
}

/// The training device chosen to seed a new device's embedding row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonorChoice {
    pub donor: String,
    pub donor_ordinal: usize,
    pub rho: f64,
    pub new_ordinal: usize,
}

/// Index of the column with the highest Spearman correlation to `target`;
/// ties keep the lowest index, undefined correlations are skipped.
pub fn argmax_correlation(target: &[f64], columns: &[Vec<f64>]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, col) in columns.iter().enumerate() {
        let rho = match spearman_rho(col, target) {
            Ok(rho) => rho,
            Err(Error::UndefinedCorrelation(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.map_or(true, |(_, b)| rho > b) {
            best = Some((i, rho));
        }
    }
    best.ok_or_else(|| {
        Error::UndefinedCorrelation("no training device has a defined correlation".into())
    })
}

/// Registers `new_device` with a copy of the row of the training device whose
/// latencies on the sampled architectures correlate best with the new
/// device's. `train_latency(device, arch)` supplies the training measurements.
pub fn init_new_device<F>(
    table: &mut EmbeddingTable,
    new_device: &str,
    samples: &[(String, f64)],
    train_latency: F,
) -> Result<DonorChoice>
where
    F: Fn(&str, &str) -> Option<f64>,
{
    if samples.len() < 2 {
        return Err(Error::Argument(format!(
            "embedding initialization needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if table.is_empty() {
        return Err(Error::State(
            "embedding table has no training devices".into(),
        ));
    }
    let target: Vec<f64> = samples.iter().map(|(_, ms)| *ms).collect();
    spearman_rho(&target, &target)?;
    let mut columns = Vec::with_capacity(table.len());
    for device in table.device_ids() {
        let mut col = Vec::with_capacity(samples.len());
        let mut missing = Vec::new();
        for (arch, _) in samples {
            match train_latency(device, arch) {
                Some(v) => col.push(v),
                None => missing.push(arch.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Data {
                context: format!("training device `{device}` lacks sampled architectures"),
                missing,
            });
        }
        columns.push(col);
    }
    let (donor_ordinal, rho) = argmax_correlation(&target, &columns)?;
    let row = table.row(donor_ordinal).to_vec();
    let donor = table.device_ids()[donor_ordinal].clone();
    let new_ordinal = table.register(new_device, &row)?;
    Ok(DonorChoice {
        donor,
        donor_ordinal,
        rho,
        new_ordinal,
    })
}

/// How devices are represented at the predictor input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DeviceRepr {
    Table {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Index {
        /// Defaults to one bit more than the training devices need, leaving
        /// room for as many new devices.
        #[serde(default)]
        width: Option<usize>,
    },
    Sample {
        reference_archs: Vec<String>,
    },
}

fn default_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}

impl Default for DeviceRepr {
    fn default() -> Self {
        Self::Table {
            dim: DEFAULT_EMBEDDING_DIM,
        }
    }
}

impl DeviceRepr {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Table { .. } => "table",
            Self::Index { .. } => "index",
            Self::Sample { .. } => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEncoder {
    pub device_ids: Vec<String>,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEncoder {
    pub reference_archs: Vec<String>,
    pub ranges: Vec<FeatureRange>,
    pub device_ids: Vec<String>,
    pub vectors: DenseMatrix,
}

/// A fitted device representation, concatenated after the architecture
/// encoding at the predictor input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DeviceEncoder {
    Table(EmbeddingTable),
    Index(IndexEncoder),
    Sample(SampleEncoder),
}

impl DeviceEncoder {
    /// Builds the representation for `devices`. `latency(device, arch)` is
    /// consulted only for sample-based encoders.
    pub fn build<R, F>(
        repr: &DeviceRepr,
        devices: &[String],
        latency: F,
        rng: &mut R,
    ) -> Result<Self>
    where
        R: Rng + ?Sized,
        F: Fn(&str, &str) -> Option<f64>,
    {
        if devices.is_empty() {
            return Err(Error::Argument(
                "device representation needs at least one device".into(),
            ));
        }
        match repr {
            DeviceRepr::Table { dim } => {
                Ok(Self::Table(EmbeddingTable::random(devices, *dim, rng)?))
            }
            DeviceRepr::Index { width } => {
                let width = width.unwrap_or(index_width(devices.len()) + 1);
                if width < index_width(devices.len()) {
                    return Err(Error::Range {
                        context: format!("{width} bits cannot index {} devices", devices.len()),
                    });
                }
                Ok(Self::Index(IndexEncoder {
                    device_ids: devices.to_vec(),
                    width,
                }))
            }
            DeviceRepr::Sample { reference_archs } => {
                if reference_archs.is_empty() {
                    return Err(Error::Argument(
                        "sample representation needs reference architectures".into(),
                    ));
                }
                let maps: Vec<BTreeMap<String, f64>> = devices
                    .iter()
                    .map(|d| device_map(d, reference_archs, &latency))
                    .collect::<Result<_>>()?;
                let refs: Vec<&BTreeMap<String, f64>> = maps.iter().collect();
                let ranges = fit_sample_ranges(&refs, reference_archs)?;
                let mut vectors = DenseMatrix::zeros(0, reference_archs.len());
                for m in &maps {
                    vectors.push_row(&sample_embedding(m, reference_archs, &ranges)?)?;
                }
                Ok(Self::Sample(SampleEncoder {
                    reference_archs: reference_archs.clone(),
                    ranges,
                    device_ids: devices.to_vec(),
                    vectors,
                }))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Table(_) => "table",
            Self::Index(_) => "index",
            Self::Sample(_) => "sample",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Table(t) => t.dim(),
            Self::Index(i) => i.width,
            Self::Sample(s) => s.reference_archs.len(),
        }
    }

    pub fn device_ids(&self) -> &[String] {
        match self {
            Self::Table(t) => t.device_ids(),
            Self::Index(i) => &i.device_ids,
            Self::Sample(s) => &s.device_ids,
        }
    }

    pub fn ordinal(&self, device_id: &str) -> Result<usize> {
        self.device_ids()
            .iter()
            .position(|d| d == device_id)
            .ok_or_else(|| Error::Lookup {
                kind: "device",
                id: device_id.into(),
            })
    }

    /// Writes the representation of device `ordinal` into `out`.
    pub fn write_vector(&self, ordinal: usize, out: &mut Vec<f64>) -> Result<()> {
        match self {
            Self::Table(t) => out.extend_from_slice(t.row(ordinal)),
            Self::Index(i) => out.extend(index_embedding(ordinal, i.width)?),
            Self::Sample(s) => out.extend_from_slice(s.vectors.row(ordinal)),
        }
        Ok(())
    }

    pub fn vector(&self, device_id: &str) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim());
        self.write_vector(self.ordinal(device_id)?, &mut out)?;
        Ok(out)
    }

    /// Adds a device not seen in training. Tables copy the best-correlated
    /// training row, indices take the next ordinal, samples read the new
    /// device's reference latencies (which must be among `samples`).
    pub fn register_new<F>(
        &mut self,
        device_id: &str,
        samples: &[(String, f64)],
        train_latency: F,
    ) -> Result<Option<DonorChoice>>
    where
        F: Fn(&str, &str) -> Option<f64>,
    {
        if self.ordinal(device_id).is_ok() {
            return Err(Error::Integrity(format!(
                "device `{device_id}` already registered"
            )));
        }
        match self {
            Self::Table(t) => init_new_device(t, device_id, samples, train_latency).map(Some),
            Self::Index(i) => {
                index_embedding(i.device_ids.len(), i.width)?;
                i.device_ids.push(device_id.into());
                Ok(None)
            }
            Self::Sample(s) => {
                let measured: BTreeMap<String, f64> = samples.iter().cloned().collect();
                let v = sample_embedding(&measured, &s.reference_archs, &s.ranges)?;
                s.vectors.push_row(&v)?;
                s.device_ids.push(device_id.into());
                Ok(None)
            }
        }
    }
}

fn device_map<F>(device: &str, archs: &[String], latency: &F) -> Result<BTreeMap<String, f64>>
where
    F: Fn(&str, &str) -> Option<f64>,
{
    let mut map = BTreeMap::new();
    let mut missing = Vec::new();
    for a in archs {
        match latency(device, a) {
            Some(v) => {
                map.insert(a.clone(), v);
            }
            None => missing.push(a.clone()),
        }
    }
    if missing.is_empty() {
        Ok(map)
    } else {
        Err(Error::Data {
            context: format!("device `{device}` lacks reference measurements"),
            missing,
        })
    }
}
