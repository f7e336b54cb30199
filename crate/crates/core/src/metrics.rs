//! Rank statistics and device/task correlation analysis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use crate::dataset::BenchmarkDataset;
use crate::{Error, Result};

/// Fractional ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation of fractional ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            context: "spearman_rho",
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 paired values, got {}",
            a.len()
        )));
    }
    if let Some(i) = a.iter().chain(b).position(|v| v.is_nan()) {
        return Err(Error::Numeric {
            context: "spearman_rho input".into(),
            index: i % a.len(),
        });
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    // ranks of n items always average (n+1)/2
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let dx = x - mean;
        let dy = y - mean;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("constant ranks".into()));
    }
    Ok((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

/// Which per-architecture columns to correlate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// One column per device.
    Latency,
    /// One column per proxy, plus `accuracy` when the dataset carries it.
    Proxy,
}

/// Symmetric matrix of pairwise Spearman-ρ. `None` marks a pair with fewer
/// than two shared architectures or constant ranks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    values: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    /// Pairwise-complete correlations over labelled sparse columns.
    pub fn from_columns(labels: Vec<String>, columns: &[BTreeMap<String, f64>]) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Shape {
                context: "correlation columns",
                expected: labels.len(),
                found: columns.len(),
            });
        }
        if labels.len() < 2 {
            return Err(Error::Argument(
                "correlation matrix needs at least 2 columns".into(),
            ));
        }
        let n = labels.len();
        let mut values = vec![None; n * n];
        for i in 0..n {
            values[i * n + i] = Some(1.0);
            for j in i + 1..n {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                for (arch, va) in &columns[i] {
                    if let Some(vb) = columns[j].get(arch) {
                        a.push(*va);
                        b.push(*vb);
                    }
                }
                let rho = spearman_rho(&a, &b).ok();
                values[i * n + j] = rho;
                values[j * n + i] = rho;
            }
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.len() + j]
    }

    pub fn get_by_label(&self, a: &str, b: &str) -> Result<Option<f64>> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        Ok(self.get(i, j))
    }

    fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::Lookup {
            kind: "correlation label",
            id: label.into(),
        })
    }

    /// Label pairs (i < j) whose correlation could not be computed.
    pub fn missing_pairs(&self) -> Vec<(String, String)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.get(i, j).is_none() {
                    out.push((self.labels[i].clone(), self.labels[j].clone()));
                }
            }
        }
        out
    }
}

/// Correlation matrix of device latencies or proxy scores across the dataset.
pub fn correlation_matrix(
    dataset: &BenchmarkDataset,
    kind: ColumnKind,
) -> Result<CorrelationMatrix> {
    let mut labels: Vec<String> = match kind {
        ColumnKind::Latency => dataset.devices().to_vec(),
        ColumnKind::Proxy => dataset.proxies().to_vec(),
    };
    let mut columns: Vec<BTreeMap<String, f64>> = labels
        .iter()
        .map(|label| {
            dataset
                .records()
                .iter()
                .filter_map(|r| {
                    let v = match kind {
                        ColumnKind::Latency => r.latencies.get(label),
                        ColumnKind::Proxy => r.zcp.get(label),
                    };
                    v.map(|v| (r.arch_id.clone(), *v))
                })
                .collect()
        })
        .collect();
    if kind == ColumnKind::Proxy && dataset.records().iter().any(|r| r.accuracy.is_some()) {
        labels.push("accuracy".into());
        columns.push(
            dataset
                .records()
                .iter()
                .filter_map(|r| r.accuracy.map(|a| (r.arch_id.clone(), a)))
                .collect(),
        );
    }
    CorrelationMatrix::from_columns(labels, &columns)
}

/// Train/test device partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// Highest correlation between each test device and any training device.
    pub max_train_rho: Vec<(String, Option<f64>)>,
}

impl DeviceSplit {
    /// Split with `max_train_rho` computed from `matrix`.
    pub fn new(train: Vec<String>, test: Vec<String>, matrix: &CorrelationMatrix) -> Result<Self> {
        if let Some(t) = test.iter().find(|t| train.contains(t)) {
            return Err(Error::Integrity(format!(
                "device `{t}` is in both train and test sets"
            )));
        }
        let mut split = Self {
            train,
            test,
            max_train_rho: Vec::new(),
        };
        split.max_train_rho = closest_train_device(&split, matrix)?
            .into_iter()
            .map(|c| (c.test, c.donor.map(|_| c.rho)))
            .collect();
        Ok(split)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosestDevice {
    pub test: String,
    /// `None` when no training device has a defined correlation.
    pub donor: Option<String>,
    pub rho: f64,
}

/// For each test device, the training device with the highest correlation.
/// Ties go to the earlier training device.
pub fn closest_train_device(
    split: &DeviceSplit,
    matrix: &CorrelationMatrix,
) -> Result<Vec<ClosestDevice>> {
    let train_idx: Vec<usize> = split
        .train
        .iter()
        .map(|t| matrix.require(t))
        .collect::<Result<_>>()?;
    split
        .test
        .iter()
        .map(|test| {
            let ti = matrix.require(test)?;
            let mut best: Option<(usize, f64)> = None;
            for (k, &j) in train_idx.iter().enumerate() {
                if let Some(rho) = matrix.get(ti, j) {
                    if best.map_or(true, |(_, b)| rho > b) {
                        best = Some((k, rho));
                    }
                }
            }
            Ok(ClosestDevice {
                test: test.clone(),
                donor: best.map(|(k, _)| split.train[k].clone()),
                rho: best.map_or(f64::NAN, |(_, r)| r),
            })
        })
        .collect()
}

/// Keeps as training devices only those whose correlation with every test
/// device is strictly below `threshold`. Pairs with undefined correlation
/// cannot be shown to satisfy the bound and are excluded.
pub fn build_adversarial_split(
    matrix: &CorrelationMatrix,
    test_ids: &[String],
    threshold: f64,
) -> Result<DeviceSplit> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Range {
            context: format!("threshold {threshold} outside (0, 1]"),
        });
    }
    let test_idx: Vec<usize> = test_ids
        .iter()
        .map(|t| matrix.require(t))
        .collect::<Result<_>>()?;
    let train: Vec<String> = matrix
        .labels
        .iter()
        .enumerate()
        .filter(|(i, _)| !test_idx.contains(i))
        .filter(|(i, _)| {
            // threshold 1.0 keeps everything, including perfectly correlated devices
            test_idx.iter().all(|&t| match matrix.get(*i, t) {
                Some(rho) => threshold >= 1.0 || rho < threshold,
                None => false,
            })
        })
        .map(|(_, l)| l.clone())
        .collect();
    if train.is_empty() {
        return Err(Error::InfeasibleSplit { threshold });
    }
    DeviceSplit::new(train, test_ids.to_vec(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn fixed_examples() {
        assert_eq!(
            spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
            1.0
        );
        assert_eq!(
            spearman_rho(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap(),
            -1.0
        );
        assert_eq!(
            spearman_rho(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap(),
            0.8
        );
    }

    #[test]
    fn ties_use_average_ranks() {
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        let rho = spearman_rho(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((rho - libm::sqrt(3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(
            spearman_rho(&[1.0], &[2.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(
            spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    fn columns(cols: &[&[f64]]) -> (Vec<String>, Vec<BTreeMap<String, f64>>) {
        let labels = (0..cols.len()).map(|i| format!("d{i}")).collect();
        let maps = cols
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(k, v)| (format!("a{k}"), *v))
                    .collect()
            })
            .collect();
        (labels, maps)
    }

    #[test]
    fn duplicated_and_negated_columns() {
        let base = [1.0, 4.0, 2.0, 8.0];
        let neg: Vec<f64> = base.iter().map(|v| -v).collect();
        let (labels, cols) = columns(&[&base, &base, &neg]);
        let m = CorrelationMatrix::from_columns(labels, &cols).unwrap();
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(m.get(0, 2), Some(-1.0));
        assert_eq!(m.get(2, 2), Some(1.0));
    }

    #[test]
    fn disjoint_columns_are_flagged_missing() {
        let mut a = BTreeMap::new();
        a.insert("x".to_string(), 1.0);
        a.insert("y".to_string(), 2.0);
        let mut b = BTreeMap::new();
        b.insert("z".to_string(), 1.0);
        let m = CorrelationMatrix::from_columns(vec!["a".into(), "b".into()], &[a, b]).unwrap();
        assert_eq!(m.get(0, 1), None);
        assert_eq!(m.missing_pairs(), vec![("a".to_string(), "b".to_string())]);
    }

    fn toy_matrix() -> CorrelationMatrix {
        // d0 test; d1 clone, d2 strongly, d3 weakly, d4 negatively related
        let t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let (labels, cols) = columns(&[
            &t,
            &t,
            &[1.0, 3.0, 2.0, 4.0, 6.0, 5.0],
            &[3.0, 1.0, 6.0, 2.0, 5.0, 4.0],
            &[6.0, 5.0, 4.0, 3.0, 1.0, 2.0],
        ]);
        CorrelationMatrix::from_columns(labels, &cols).unwrap()
    }

    #[test]
    fn closest_device_is_the_clone() {
        let m = toy_matrix();
        let split = DeviceSplit::new(
            vec!["d1".into(), "d2".into(), "d3".into()],
            vec!["d0".into()],
            &m,
        )
        .unwrap();
        let c = closest_train_device(&split, &m).unwrap();
        assert_eq!(c[0].donor.as_deref(), Some("d1"));
        assert_eq!(c[0].rho, 1.0);
    }

    #[test]
    fn adversarial_split_filters_by_threshold() {
        let m = toy_matrix();
        let test = vec!["d0".to_string()];
        let all = build_adversarial_split(&m, &test, 1.0).unwrap();
        assert_eq!(all.train.len(), 4);
        let strict = build_adversarial_split(&m, &test, 0.7).unwrap();
        assert!(!strict.train.contains(&"d1".to_string()));
        assert!(!strict.train.contains(&"d2".to_string()));
        for d in &strict.train {
            assert!(m.get_by_label(d, "d0").unwrap().unwrap() < 0.7);
        }
        assert!(matches!(
            build_adversarial_split(&m, &test, 0.01).map(|s| s.train),
            Ok(ref t) if t == &vec!["d4".to_string()]
        ));
        assert!(build_adversarial_split(&m, &test, 0.0).is_err());
    }

    #[test]
    fn infeasible_split() {
        let base = [1.0, 2.0, 3.0];
        let (labels, cols) = columns(&[&base, &base]);
        let m = CorrelationMatrix::from_columns(labels, &cols).unwrap();
        assert_eq!(
            build_adversarial_split(&m, &["d0".to_string()], 0.5),
            Err(Error::InfeasibleSplit { threshold: 0.5 })
        );
    }

    #[test]
    fn overlapping_split_rejected() {
        let m = toy_matrix();
        assert!(DeviceSplit::new(vec!["d0".into()], vec!["d0".into()], &m).is_err());
    }
}
