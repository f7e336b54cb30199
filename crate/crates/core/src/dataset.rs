//! Benchmark containers and seeded train/eval splits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::encoding::{ArchitectureRecord, SpaceSchema};
use crate::rng::seeded;
use crate::{Error, Result};

/// All records of one search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetParts", into = "DatasetParts")]
pub struct BenchmarkDataset {
    space_id: String,
    schema: Option<SpaceSchema>,
    records: Vec<ArchitectureRecord>,
    devices: Vec<String>,
    proxies: Vec<String>,
    index: BTreeMap<String, usize>,
    partial: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DatasetParts {
    space_id: String,
    schema: Option<SpaceSchema>,
    records: Vec<ArchitectureRecord>,
}

impl TryFrom<DatasetParts> for BenchmarkDataset {
    type Error = Error;

    fn try_from(p: DatasetParts) -> Result<Self> {
        Self::new(p.space_id, p.schema, p.records)
    }
}

impl From<BenchmarkDataset> for DatasetParts {
    fn from(d: BenchmarkDataset) -> Self {
        Self {
            space_id: d.space_id,
            schema: d.schema,
            records: d.records,
        }
    }
}

impl BenchmarkDataset {
    /// Validates ids, measurements and topology vectors. Device and proxy
    /// lists are the sorted union over records; records missing some of them
    /// are reported by [`BenchmarkDataset::partial_records`].
    pub fn new(
        space_id: impl Into<String>,
        schema: Option<SpaceSchema>,
        mut records: Vec<ArchitectureRecord>,
    ) -> Result<Self> {
        let space_id = space_id.into();
        if let Some(schema) = &schema {
            schema.validate()?;
            if schema.space_id != space_id {
                return Err(Error::Integrity(format!(
                    "schema is for space `{}`, dataset is `{space_id}`",
                    schema.space_id
                )));
            }
        }
        let mut index = BTreeMap::new();
        let mut devices = BTreeSet::new();
        let mut proxies = BTreeSet::new();
        for (i, r) in records.iter_mut().enumerate() {
            if r.space_id.is_empty() {
                r.space_id = space_id.clone();
            } else if r.space_id != space_id {
                return Err(Error::Integrity(format!(
                    "record `{}` belongs to space `{}`, dataset is `{space_id}`",
                    r.arch_id, r.space_id
                )));
            }
            if index.insert(r.arch_id.clone(), i).is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate arch_id `{}`",
                    r.arch_id
                )));
            }
            for (device, &ms) in &r.latencies {
                if !(ms > 0.0 && ms.is_finite()) {
                    return Err(Error::Range {
                        context: format!("latency of `{}` on `{device}` is {ms}", r.arch_id),
                    });
                }
                devices.insert(device.clone());
            }
            proxies.extend(r.zcp.keys().cloned());
            if let (Some(schema), Some(vec)) = (&schema, &r.vec) {
                schema.check_vec(&r.arch_id, vec)?;
            }
        }
        let devices: Vec<String> = devices.into_iter().collect();
        let proxies: Vec<String> = proxies.into_iter().collect();
        let partial = records
            .iter()
            .filter(|r| r.latencies.len() != devices.len() || r.zcp.len() != proxies.len())
            .map(|r| r.arch_id.clone())
            .collect();
        Ok(Self {
            space_id,
            schema,
            records,
            devices,
            proxies,
            index,
            partial,
        })
    }

    pub fn space_id(&self) -> &str {
        &self.space_id
    }

    pub fn schema(&self) -> Option<&SpaceSchema> {
        self.schema.as_ref()
    }

    pub fn vec_len(&self) -> Option<usize> {
        self.schema.as_ref().map(|s| s.vec_len)
    }

    pub fn records(&self) -> &[ArchitectureRecord] {
        &self.records
    }

    pub fn devices(&self) -> &[String] {
        &self.devices
    }

    pub fn proxies(&self) -> &[String] {
        &self.proxies
    }

    /// Records that lack some device latency or proxy score.
    pub fn partial_records(&self) -> &[String] {
        &self.partial
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, arch_id: &str) -> Option<&ArchitectureRecord> {
        self.index.get(arch_id).map(|&i| &self.records[i])
    }

    pub fn require(&self, arch_id: &str) -> Result<&ArchitectureRecord> {
        self.get(arch_id).ok_or_else(|| Error::Lookup {
            kind: "architecture",
            id: arch_id.into(),
        })
    }

    pub fn arch_ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.arch_id.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSize {
    Fraction(f64),
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub eval: Vec<String>,
}

impl Split {
    /// True when nothing is left to evaluate on.
    pub fn eval_is_empty(&self) -> bool {
        self.eval.is_empty()
    }
}

/// Uniform random disjoint split, deterministic in `seed`.
pub fn make_split(dataset: &BenchmarkDataset, size: SplitSize, seed: u64) -> Result<Split> {
    let ids: Vec<String> = dataset.arch_ids().map(String::from).collect();
    split_ids(ids, size, seed)
}

/// [`make_split`] over an explicit id list.
pub fn split_ids(mut ids: Vec<String>, size: SplitSize, seed: u64) -> Result<Split> {
    let n = ids.len();
    let train_len = match size {
        SplitSize::Fraction(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Argument(format!(
                    "train fraction {f} outside [0, 1]"
                )));
            }
            libm::floor(f * n as f64) as usize
        }
        SplitSize::Count(c) => c,
    };
    if train_len > n {
        return Err(Error::Argument(format!(
            "requested {train_len} training architectures from {n}"
        )));
    }
    ids.shuffle(&mut seeded(seed));
    let eval = ids.split_off(train_len);
    Ok(Split { train: ids, eval })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn toy(n: usize) -> BenchmarkDataset {
        let records = (0..n)
            .map(|i| {
                let mut r = ArchitectureRecord::new(format!("a{i}"), "toy");
                r.latencies.insert("cpu".into(), 1.0 + i as f64);
                r
            })
            .collect();
        BenchmarkDataset::new("toy", None, records).unwrap()
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = ArchitectureRecord::new("dup", "toy");
        let err = BenchmarkDataset::new("toy", None, vec![r.clone(), r]).unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m.contains("dup")));
    }

    #[test]
    fn non_positive_latency_rejected() {
        let mut r = ArchitectureRecord::new("a", "toy");
        r.latencies.insert("cpu".into(), 0.0);
        assert!(BenchmarkDataset::new("toy", None, vec![r]).is_err());
    }

    #[test]
    fn partial_records_flagged() {
        let mut a = ArchitectureRecord::new("a", "toy");
        a.latencies.insert("cpu".into(), 1.0);
        a.latencies.insert("gpu".into(), 2.0);
        let mut b = ArchitectureRecord::new("b", "toy");
        b.latencies.insert("cpu".into(), 1.0);
        let d = BenchmarkDataset::new("toy", None, vec![a, b]).unwrap();
        assert_eq!(d.devices(), &["cpu".to_string(), "gpu".to_string()]);
        assert_eq!(d.partial_records(), &["b".to_string()]);
    }

    #[test]
    fn fifteen_percent_of_4096() {
        let s = make_split(&toy(4096), SplitSize::Fraction(0.15), 3).unwrap();
        assert_eq!(s.train.len(), 614);
        assert_eq!(s.eval.len(), 4096 - 614);
    }

    #[test]
    fn full_fraction_leaves_eval_empty() {
        let s = make_split(&toy(10), SplitSize::Fraction(1.0), 0).unwrap();
        assert!(s.eval_is_empty());
        assert_eq!(s.train.len(), 10);
    }

    #[test]
    fn seeded_and_disjoint() {
        let d = toy(50);
        let a = make_split(&d, SplitSize::Count(20), 9).unwrap();
        let b = make_split(&d, SplitSize::Count(20), 9).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<&String> = a.train.iter().chain(&a.eval).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 50);
        assert!(make_split(&d, SplitSize::Count(51), 0).is_err());
    }
}
