//! Latent-factor generator for correlated synthetic benchmarks.
//!
//! Each architecture draws a latent `u ~ N(0, I_k)`. A device column is
//! `softplus(w·u + ε)`, a proxy column is `v·u + ε`, accuracy is
//! `σ(t·u + ε)`. Because every column is a monotone transform of a Gaussian
//! projection, the Spearman correlation between two columns is known in
//! closed form, `(6/π)·asin(r/2)` with `r` the Pearson correlation of the
//! projections.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::BenchmarkDataset;
use crate::encoding::{ArchitectureRecord, SpaceSchema, STANDARD_PROXIES};
use crate::rng::{derive_seed, seeded, standard_normal};
use crate::tensor::dot;
use crate::{Error, Result};

/// A generated column: a named loading vector plus additive noise scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedColumn {
    pub name: String,
    pub loading: Vec<f64>,
    #[serde(default)]
    pub noise: f64,
}

impl LoadedColumn {
    pub fn new(name: impl Into<String>, loading: Vec<f64>, noise: f64) -> Self {
        Self {
            name: name.into(),
            loading,
            noise,
        }
    }
}

/// Topology vectors derived from thresholded noisy projections of the latent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub node_count: usize,
    pub n_ops: usize,
    /// Noise added to each projection before quantization; large values make
    /// the vector nearly independent of the latent.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub space_id: String,
    pub n_archs: usize,
    pub latent_dim: usize,
    pub seed: u64,
    #[serde(default)]
    pub devices: Vec<LoadedColumn>,
    #[serde(default)]
    pub proxies: Vec<LoadedColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<LoadedColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
}

impl SyntheticSpec {
    /// Random unit loadings for `n_devices` devices, `n_proxies` proxies
    /// (named after the standard proxy list while it lasts) and accuracy.
    pub fn random(
        space_id: impl Into<String>,
        n_archs: usize,
        n_devices: usize,
        n_proxies: usize,
        latent_dim: usize,
        seed: u64,
    ) -> Self {
        let mut rng = seeded(derive_seed(seed, 0x10ad));
        let devices = (0..n_devices)
            .map(|i| LoadedColumn::new(format!("dev{i}"), random_unit(latent_dim, &mut rng), 0.05))
            .collect();
        let proxies = (0..n_proxies)
            .map(|i| {
                let name = STANDARD_PROXIES
                    .get(i)
                    .map_or_else(|| format!("proxy{i}"), |s| s.to_string());
                LoadedColumn::new(name, random_unit(latent_dim, &mut rng), 0.3)
            })
            .collect();
        Self {
            space_id: space_id.into(),
            n_archs,
            latent_dim,
            seed,
            devices,
            proxies,
            accuracy: Some(LoadedColumn::new(
                "accuracy",
                random_unit(latent_dim, &mut rng),
                0.05,
            )),
            topology: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Spec("latent_dim must be positive".into()));
        }
        if self.n_archs == 0 {
            return Err(Error::Spec("n_archs must be positive".into()));
        }
        let columns = self
            .devices
            .iter()
            .chain(&self.proxies)
            .chain(&self.accuracy);
        for c in columns {
            if c.loading.len() != self.latent_dim {
                return Err(Error::Spec(format!(
                    "column `{}` has {} loadings, latent_dim is {}",
                    c.name,
                    c.loading.len(),
                    self.latent_dim
                )));
            }
            if c.loading.iter().any(|v| !v.is_finite()) {
                return Err(Error::Spec(format!(
                    "column `{}` has non-finite loadings",
                    c.name
                )));
            }
            if c.loading.iter().all(|v| *v == 0.0) {
                return Err(Error::Spec(format!(
                    "column `{}` has all-zero loadings",
                    c.name
                )));
            }
            if !(c.noise >= 0.0 && c.noise.is_finite()) {
                return Err(Error::Spec(format!(
                    "column `{}` has invalid noise {}",
                    c.name, c.noise
                )));
            }
        }
        let mut names: Vec<&str> = self.devices.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Spec("duplicate device names".into()));
        }
        let mut names: Vec<&str> = self.proxies.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Spec("duplicate proxy names".into()));
        }
        if let Some(t) = &self.topology {
            if t.node_count < 2 || t.n_ops == 0 || !(t.noise >= 0.0) {
                return Err(Error::Spec(
                    "topology needs node_count >= 2 and n_ops >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> Option<SpaceSchema> {
        self.topology.as_ref().map(|t| SpaceSchema {
            space_id: self.space_id.clone(),
            node_count: t.node_count,
            ops: (0..t.n_ops).map(|i| format!("op{i}")).collect(),
            vec_len: t.node_count * (t.node_count - 1) / 2 + t.node_count,
        })
    }

    pub fn device(&self, name: &str) -> Option<&LoadedColumn> {
        self.devices.iter().find(|c| c.name == name)
    }

    /// Closed-form Spearman correlation between two generated columns.
    pub fn analytic_rho(a: &LoadedColumn, b: &LoadedColumn) -> f64 {
        let na = dot(&a.loading, &a.loading) + a.noise * a.noise;
        let nb = dot(&b.loading, &b.loading) + b.noise * b.noise;
        spearman_for_pearson(dot(&a.loading, &b.loading) / libm::sqrt(na * nb))
    }
}

/// Spearman correlation of a bivariate normal with Pearson correlation `r`.
pub fn spearman_for_pearson(r: f64) -> f64 {
    6.0 / core::f64::consts::PI * libm::asin(r / 2.0)
}

/// Inverse of [`spearman_for_pearson`].
pub fn pearson_for_spearman(rho: f64) -> f64 {
    2.0 * libm::sin(core::f64::consts::PI * rho / 6.0)
}

pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let n = libm::sqrt(dot(&v, &v));
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Unit vector whose cosine with `base` is exactly `cosine` and which is
/// orthogonal to every vector in `avoid` (beyond its `base` component).
pub fn loading_with_cosine<R: Rng + ?Sized>(
    base: &[f64],
    cosine: f64,
    avoid: &[&[f64]],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(-1.0..=1.0).contains(&cosine) {
        return Err(Error::Spec(format!("cosine {cosine} outside [-1, 1]")));
    }
    let dim = base.len();
    if dim < avoid.len() + 2 {
        return Err(Error::Spec(format!(
            "latent dimension {dim} too small to orthogonalize against {} vectors",
            avoid.len() + 1
        )));
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in core::iter::once(base).chain(avoid.iter().copied()) {
        if let Some(u) = orthonormalize(v, &basis) {
            basis.push(u);
        }
    }
    let b_hat = basis
        .first()
        .cloned()
        .ok_or_else(|| Error::Spec("base loading is zero".into()))?;
    let other = loop {
        let candidate = random_unit(dim, rng);
        if let Some(u) = orthonormalize(&candidate, &basis) {
            break u;
        }
    };
    let s = libm::sqrt((1.0 - cosine * cosine).max(0.0));
    Ok(b_hat
        .iter()
        .zip(&other)
        .map(|(b, o)| cosine * b + s * o)
        .collect())
}

fn orthonormalize(v: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut w = v.to_vec();
    for b in basis {
        let p = dot(&w, b);
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
    let n = libm::sqrt(dot(&w, &w));
    (n > 1e-9).then(|| w.into_iter().map(|x| x / n).collect())
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        libm::log1p(libm::exp(x))
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

/// Generates the dataset described by `spec`; identical specs give identical
/// datasets.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<BenchmarkDataset> {
    spec.validate()?;
    let k = spec.latent_dim;
    let schema = spec.schema();
    let projections: Vec<Vec<f64>> = match &schema {
        Some(s) => {
            let mut rng = seeded(derive_seed(spec.seed, 0x7090));
            (0..s.vec_len).map(|_| random_unit(k, &mut rng)).collect()
        }
        None => Vec::new(),
    };
    let mut rng = seeded(spec.seed);
    let width = digits(spec.n_archs);
    let mut records = Vec::with_capacity(spec.n_archs);
    let mut u = alloc::vec![0.0; k];
    for i in 0..spec.n_archs {
        u.iter_mut().for_each(|x| *x = standard_normal(&mut rng));
        let mut r = ArchitectureRecord::new(
            format!("{}-{:0width$}", spec.space_id, i, width = width),
            spec.space_id.clone(),
        );
        for d in &spec.devices {
            let z = dot(&d.loading, &u) + d.noise * standard_normal(&mut rng);
            // floor keeps latencies strictly positive for very negative z
            r.latencies.insert(d.name.clone(), softplus(z).max(1e-9));
        }
        for p in &spec.proxies {
            let z = dot(&p.loading, &u) + p.noise * standard_normal(&mut rng);
            r.zcp.insert(p.name.clone(), z);
        }
        if let Some(a) = &spec.accuracy {
            let z = dot(&a.loading, &u) + a.noise * standard_normal(&mut rng);
            r.accuracy = Some(sigmoid(z));
        }
        if let (Some(s), Some(t)) = (&schema, &spec.topology) {
            let adj = s.adjacency_len();
            let vec = projections
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let z = dot(w, &u) + t.noise * standard_normal(&mut rng);
                    let scaled = z / libm::sqrt(1.0 + t.noise * t.noise);
                    if j < adj {
                        i64::from(scaled > 0.0)
                    } else {
                        let bin = (std_normal_cdf(scaled) * t.n_ops as f64) as i64;
                        bin.clamp(0, t.n_ops as i64 - 1)
                    }
                })
                .collect();
            r.vec = Some(vec);
        }
        records.push(r);
    }
    BenchmarkDataset::new(spec.space_id.clone(), schema, records)
}

fn digits(n: usize) -> usize {
    let mut d = 1;
    let mut m = n.saturating_sub(1);
    while m >= 10 {
        m /= 10;
        d += 1;
    }
    d
}
