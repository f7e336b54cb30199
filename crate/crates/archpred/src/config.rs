//! Experiment configuration files (TOML), one per run.

use std::fs;
use std::path::{Path, PathBuf};

use archpred_core::rng::{derive_seed, seeded};
use archpred_core::synthetic::{loading_with_cosine, pearson_for_spearman, TopologySpec};
use archpred_core::{
    generate_synthetic, BenchmarkDataset, DeviceRepr, EncodingKind, EncodingMode, SyntheticSpec,
    TargetKind, TrainConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_dataset, load_schema, toml_error, LoadOptions};
use crate::output::sha256_hex;

/// Either a dataset file or an inline synthetic generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default)]
    pub space_id: Option<String>,
    #[serde(default = "one")]
    pub unit_multiplier: f64,
    #[serde(default)]
    pub synthetic: Option<SyntheticConfig>,
}

fn one() -> f64 {
    1.0
}

impl DatasetConfig {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self {
            path: Some(path.into()),
            unit_multiplier: 1.0,
            ..Self::default()
        }
    }

    pub fn synthetic(spec: SyntheticConfig) -> Self {
        Self {
            unit_multiplier: 1.0,
            synthetic: Some(spec),
            ..Self::default()
        }
    }

    fn validate(&self, key: &str, problems: &mut Vec<String>) {
        match (&self.path, &self.synthetic) {
            (Some(_), Some(_)) => problems.push(format!(
                "{key}: give either `path` or `synthetic`, not both"
            )),
            (None, None) => problems.push(format!("{key}: needs `path` or `synthetic`")),
            (None, Some(s)) => s.validate(&format!("{key}.synthetic"), problems),
            (Some(_), None) => {}
        }
        if !(self.unit_multiplier > 0.0 && self.unit_multiplier.is_finite()) {
            problems.push(format!("{key}.unit_multiplier must be positive"));
        }
    }

    /// Relative paths resolve against `root`.
    pub fn load(&self, root: &Path) -> Result<BenchmarkDataset> {
        if let Some(s) = &self.synthetic {
            return Ok(generate_synthetic(&s.build()?)?);
        }
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| Error::config("dataset needs `path`"))?;
        let schema = self
            .schema
            .as_ref()
            .map(|p| load_schema(&root.join(p)))
            .transpose()?;
        let options = LoadOptions {
            space_id: self.space_id.clone(),
            unit_multiplier: self.unit_multiplier,
        };
        load_dataset(&root.join(path), schema, &options)
    }
}

/// A device generated with a chosen Spearman correlation to an earlier one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedDevice {
    pub name: String,
    pub base: String,
    pub rho: f64,
    #[serde(default = "device_noise")]
    pub noise: f64,
    /// Devices whose loadings the new one is made orthogonal to, apart from
    /// its shared component with `base`.
    #[serde(default)]
    pub avoid: Vec<String>,
}

/// Random-loading synthetic benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    #[serde(default = "synthetic_space")]
    pub space_id: String,
    pub n_archs: usize,
    #[serde(default = "latent_dim")]
    pub latent_dim: usize,
    /// Seeds the architectures' latents and noise.
    #[serde(default)]
    pub seed: u64,
    /// Seeds the loadings; spaces sharing it share every loading. Defaults to `seed`.
    #[serde(default)]
    pub loading_seed: Option<u64>,
    #[serde(default)]
    pub n_devices: usize,
    #[serde(default = "n_proxies")]
    pub n_proxies: usize,
    #[serde(default = "device_noise")]
    pub device_noise: f64,
    #[serde(default = "proxy_noise")]
    pub proxy_noise: f64,
    /// `None` drops the accuracy column.
    #[serde(default = "accuracy_noise")]
    pub accuracy_noise: Option<f64>,
    /// Rotates the accuracy loading to this cosine with the shared one.
    #[serde(default)]
    pub accuracy_cosine: Option<f64>,
    #[serde(default)]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub correlated: Vec<CorrelatedDevice>,
}

fn synthetic_space() -> String {
    "synthetic".into()
}
fn latent_dim() -> usize {
    8
}
fn n_proxies() -> usize {
    12
}
fn device_noise() -> f64 {
    0.05
}
fn proxy_noise() -> f64 {
    0.3
}
fn accuracy_noise() -> Option<f64> {
    Some(0.05)
}

impl SyntheticConfig {
    pub fn new(space_id: impl Into<String>, n_archs: usize, n_devices: usize, seed: u64) -> Self {
        Self {
            space_id: space_id.into(),
            n_archs,
            latent_dim: latent_dim(),
            seed,
            loading_seed: None,
            n_devices,
            n_proxies: n_proxies(),
            device_noise: device_noise(),
            proxy_noise: proxy_noise(),
            accuracy_noise: accuracy_noise(),
            accuracy_cosine: None,
            topology: None,
            correlated: Vec::new(),
        }
    }

    fn validate(&self, key: &str, problems: &mut Vec<String>) {
        if self.n_archs < 2 {
            problems.push(format!("{key}.n_archs must be at least 2"));
        }
        if self.latent_dim == 0 {
            problems.push(format!("{key}.latent_dim must be positive"));
        }
        for (name, v) in [
            ("device_noise", self.device_noise),
            ("proxy_noise", self.proxy_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                problems.push(format!("{key}.{name} must be >= 0"));
            }
        }
        if let Some(c) = self.accuracy_cosine {
            if !(-1.0..=1.0).contains(&c) {
                problems.push(format!("{key}.accuracy_cosine must lie in [-1, 1]"));
            }
        }
        for c in &self.correlated {
            if !(-1.0..=1.0).contains(&c.rho) {
                problems.push(format!(
                    "{key}.correlated `{}`: rho must lie in [-1, 1]",
                    c.name
                ));
            }
        }
    }

    pub fn build(&self) -> Result<SyntheticSpec> {
        let loading_seed = self.loading_seed.unwrap_or(self.seed);
        let mut spec = SyntheticSpec::random(
            self.space_id.clone(),
            self.n_archs,
            self.n_devices,
            self.n_proxies,
            self.latent_dim,
            loading_seed,
        );
        spec.seed = self.seed;
        spec.topology = self.topology.clone();
        spec.devices
            .iter_mut()
            .for_each(|d| d.noise = self.device_noise);
        spec.proxies
            .iter_mut()
            .for_each(|p| p.noise = self.proxy_noise);
        match self.accuracy_noise {
            None => spec.accuracy = None,
            Some(noise) => {
                let acc = spec.accuracy.as_mut().expect("random specs carry accuracy");
                acc.noise = noise;
                if let Some(c) = self.accuracy_cosine {
                    let mut rng = seeded(derive_seed(self.seed, 0xacc));
                    acc.loading = loading_with_cosine(&acc.loading, c, &[], &mut rng)?;
                }
            }
        }
        let mut rng = seeded(derive_seed(loading_seed, 0xc0de));
        for c in &self.correlated {
            let base = spec.device(&c.base).cloned().ok_or_else(|| {
                Error::config(format!(
                    "correlated device `{}`: unknown base `{}`",
                    c.name, c.base
                ))
            })?;
            let avoid: Vec<Vec<f64>> = c
                .avoid
                .iter()
                .map(|a| {
                    spec.device(a).map(|d| d.loading.clone()).ok_or_else(|| {
                        Error::config(format!(
                            "correlated device `{}`: unknown device `{a}`",
                            c.name
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            let avoid: Vec<&[f64]> = avoid.iter().map(Vec::as_slice).collect();
            let norm = base.loading.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cosine = pearson_for_spearman(c.rho)
                * ((norm * norm + base.noise * base.noise) * (1.0 + c.noise * c.noise)).sqrt()
                / norm;
            if cosine.abs() > 1.0 {
                return Err(Error::config(format!(
                    "correlated device `{}`: rho {} unreachable with these noise levels",
                    c.name, c.rho
                )));
            }
            let loading = loading_with_cosine(&base.loading, cosine, &avoid, &mut rng)?;
            spec.devices
                .push(archpred_core::synthetic::LoadedColumn::new(
                    c.name.clone(),
                    loading,
                    c.noise,
                ));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Encoding kind plus optional explicit metric lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    pub kind: EncodingKind,
    /// Proxy names for ZCP kinds; defaults to every proxy of the dataset(s).
    #[serde(default)]
    pub proxies: Option<Vec<String>>,
    /// Reference devices for HWL kinds.
    #[serde(default)]
    pub devices: Option<Vec<String>>,
}

impl EncodingConfig {
    pub fn kind(kind: EncodingKind) -> Self {
        Self {
            kind,
            proxies: None,
            devices: None,
        }
    }

    fn validate(&self, key: &str, problems: &mut Vec<String>) {
        if self.kind.uses_latencies() && self.devices.as_ref().map_or(true, Vec::is_empty) {
            problems.push(format!(
                "{key}: {} encoding needs `devices`",
                self.kind.name()
            ));
        }
    }

    /// Resolves against the proxies available in `datasets`.
    pub fn resolve(&self, datasets: &[&BenchmarkDataset]) -> Result<EncodingMode> {
        let proxies = match (&self.proxies, self.kind.uses_proxies()) {
            (_, false) => Vec::new(),
            (Some(p), true) => p.clone(),
            (None, true) => {
                let mut common: Vec<String> = datasets
                    .first()
                    .map(|d| d.proxies().to_vec())
                    .unwrap_or_default();
                for d in &datasets[1..] {
                    common.retain(|p| d.proxies().contains(p));
                }
                common
            }
        };
        let devices = if self.kind.uses_latencies() {
            self.devices.clone().unwrap_or_default()
        } else {
            Vec::new()
        };
        Ok(EncodingMode::new(self.kind, proxies, devices)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprKind {
    Table,
    Index,
    Sample,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn pretrain_cfg() -> TrainConfig {
    TrainConfig::pretrain()
}

fn finetune_cfg() -> TrainConfig {
    TrainConfig::transfer()
}

/// Overlays the given keys onto the fine-tuning preset, so a partial
/// `[finetune]` table keeps the transfer learning rate and epochs.
fn finetune_overlay<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<TrainConfig, D::Error> {
    use serde::de::Error as _;
    let patch = serde_json::Value::deserialize(d)?;
    let serde_json::Value::Object(patch) = patch else {
        return Err(D::Error::custom("expected a table"));
    };
    let mut base = serde_json::to_value(TrainConfig::transfer()).map_err(D::Error::custom)?;
    let map = base.as_object_mut().expect("struct serializes to a map");
    for (k, v) in patch {
        map.insert(k, v);
    }
    serde_json::from_value(base).map_err(D::Error::custom)
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainExperiment {
    pub dataset: DatasetConfig,
    pub encoding: EncodingConfig,
    #[serde(default = "accuracy")]
    pub target: TargetKind,
    /// Device whose latency is predicted when `target = "latency"`.
    #[serde(default)]
    pub device: Option<String>,
    pub budgets: Vec<usize>,
    /// Caps the evaluation set drawn from the architectures left after training.
    #[serde(default)]
    pub eval_size: Option<usize>,
    #[serde(default = "pretrain_cfg")]
    pub predictor: TrainConfig,
    #[serde(default)]
    pub save_checkpoints: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn accuracy() -> TargetKind {
    TargetKind::Accuracy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferDeviceExperiment {
    pub dataset: DatasetConfig,
    pub encoding: EncodingConfig,
    #[serde(default = "table")]
    pub representation: ReprKind,
    #[serde(default = "embedding_dim")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub index_width: Option<usize>,
    pub train_devices: Vec<String>,
    pub test_devices: Vec<String>,
    #[serde(default = "pretrain_samples")]
    pub pretrain_samples: usize,
    /// Measured architectures per new device, used both to pick the donor
    /// row and to fine-tune.
    #[serde(default = "adapt_samples")]
    pub adapt_samples: usize,
    #[serde(default)]
    pub eval_size: Option<usize>,
    #[serde(default = "pretrain_cfg")]
    pub pretrain: TrainConfig,
    #[serde(default = "finetune_cfg", deserialize_with = "finetune_overlay")]
    pub finetune: TrainConfig,
    /// Also train a from-scratch predictor on the adaptation samples.
    #[serde(default = "yes")]
    pub scratch_baseline: bool,
    #[serde(default)]
    pub save_checkpoints: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn table() -> ReprKind {
    ReprKind::Table
}
fn embedding_dim() -> usize {
    archpred_core::embedding::DEFAULT_EMBEDDING_DIM
}
fn pretrain_samples() -> usize {
    900
}
fn adapt_samples() -> usize {
    10
}

impl TransferDeviceExperiment {
    pub fn repr(&self, reference_archs: &[String]) -> DeviceRepr {
        match self.representation {
            ReprKind::Table => DeviceRepr::Table {
                dim: self.embedding_dim,
            },
            ReprKind::Index => DeviceRepr::Index {
                width: self.index_width,
            },
            ReprKind::Sample => DeviceRepr::Sample {
                reference_archs: reference_archs.to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSpaceExperiment {
    pub source: DatasetConfig,
    pub target: DatasetConfig,
    pub encoding: EncodingConfig,
    #[serde(default = "accuracy")]
    pub task: TargetKind,
    #[serde(default)]
    pub device: Option<String>,
    #[serde(default = "source_fraction")]
    pub source_fraction: f64,
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub eval_size: Option<usize>,
    #[serde(default = "pretrain_cfg")]
    pub pretrain: TrainConfig,
    #[serde(default = "finetune_cfg", deserialize_with = "finetune_overlay")]
    pub finetune: TrainConfig,
    #[serde(default)]
    pub refit_normalizer: bool,
    #[serde(default = "yes")]
    pub scratch_baseline: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn source_fraction() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchExperiment {
    pub dataset: DatasetConfig,
    pub encodings: Vec<EncodingConfig>,
    #[serde(default = "search_budget")]
    pub budget: usize,
    #[serde(default = "search_batch")]
    pub batch: usize,
    /// Architectures in this top fraction count as found.
    #[serde(default = "top_fraction")]
    pub top_fraction: f64,
    #[serde(default = "pretrain_cfg")]
    pub predictor: TrainConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn search_budget() -> usize {
    100
}
fn search_batch() -> usize {
    archpred_core::search::DEFAULT_BATCH
}
fn top_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSyntheticExperiment {
    pub synthetic: SyntheticConfig,
    /// File name inside the output directory.
    #[serde(default = "dataset_name")]
    pub output: String,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn dataset_name() -> String {
    "dataset.jsonl".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalExperiment {
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub test_devices: Vec<String>,
    /// Defaults to every device not under test.
    #[serde(default)]
    pub train_devices: Option<Vec<String>>,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Also write correlation matrices bucketed at `bucket_edges`.
    #[serde(default)]
    pub buckets: bool,
    #[serde(default = "bucket_edges")]
    pub bucket_edges: Vec<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn bucket_edges() -> Vec<f64> {
    vec![0.5, 0.7]
}

/// Shared behavior of experiment configs.
pub trait Experiment: Serialize + DeserializeOwned {
    const NAME: &'static str;

    fn problems(&self) -> Vec<String>;

    fn seeds_mut(&mut self) -> Option<&mut Vec<u64>> {
        None
    }
    fn out_dir_mut(&mut self) -> &mut Option<PathBuf>;
    fn workers_mut(&mut self) -> Option<&mut Option<usize>> {
        None
    }

    fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring where outputs go and how
    /// many threads produce them.
    fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("configs serialize");
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
            map.remove("workers");
        }
        let canonical = serde_json::to_vec(&value).expect("json value serializes");
        sha256_hex(
            format!("{}\n", Self::NAME)
                .as_bytes()
                .iter()
                .chain(&canonical)
                .copied()
                .collect::<Vec<u8>>()
                .as_slice(),
        )
    }
}

pub fn parse_config<E: Experiment>(path: &Path) -> Result<E> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

pub fn parse_config_str<E: Experiment>(text: &str, path: &Path) -> Result<E> {
    toml::from_str(text).map_err(|e| match toml_error(path, text, e) {
        Error::Parse {
            path,
            line,
            message,
        } => Error::Config(vec![format!("{}:{line}: {message}", path.display())]),
        other => other,
    })
}

fn check_train_config(
    key: &str,
    c: &TrainConfig,
    allow_zero_epochs: bool,
    problems: &mut Vec<String>,
) {
    if let Err(e) = c.validate(allow_zero_epochs) {
        problems.push(format!("{key}: {e}"));
    }
}

fn check_seeds(seeds: &[u64], problems: &mut Vec<String>) {
    if seeds.is_empty() {
        problems.push("seeds must not be empty".into());
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        problems.push("seeds must be distinct".into());
    }
}

fn check_budgets(budgets: &[usize], problems: &mut Vec<String>) {
    if budgets.is_empty() {
        problems.push("budgets must not be empty".into());
    }
    if budgets.contains(&0) {
        problems.push("budgets must be positive".into());
    }
}

fn check_target(
    target: TargetKind,
    device: &Option<String>,
    key: &str,
    problems: &mut Vec<String>,
) {
    match (target, device) {
        (TargetKind::Latency, None) => problems.push(format!("{key} = \"latency\" needs `device`")),
        (TargetKind::Accuracy, Some(_)) => {
            problems.push(format!("`device` is only used with {key} = \"latency\""))
        }
        _ => {}
    }
}

impl Experiment for TrainExperiment {
    const NAME: &'static str = "train";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.dataset.validate("dataset", &mut p);
        self.encoding.validate("encoding", &mut p);
        check_target(self.target, &self.device, "target", &mut p);
        check_budgets(&self.budgets, &mut p);
        check_seeds(&self.seeds, &mut p);
        check_train_config("predictor", &self.predictor, false, &mut p);
        p
    }

    fn seeds_mut(&mut self) -> Option<&mut Vec<u64>> {
        Some(&mut self.seeds)
    }
    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
    fn workers_mut(&mut self) -> Option<&mut Option<usize>> {
        Some(&mut self.workers)
    }
}

impl Experiment for TransferDeviceExperiment {
    const NAME: &'static str = "transfer-device";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.dataset.validate("dataset", &mut p);
        self.encoding.validate("encoding", &mut p);
        if self.train_devices.is_empty() {
            p.push("train_devices must not be empty".into());
        }
        if self.test_devices.is_empty() {
            p.push("test_devices must not be empty".into());
        }
        for d in &self.test_devices {
            if self.train_devices.contains(d) {
                p.push(format!("test device `{d}` is also a training device"));
            }
            if self
                .encoding
                .devices
                .as_ref()
                .is_some_and(|ds| ds.contains(d))
            {
                p.push(format!(
                    "test device `{d}` is also an encoding input device"
                ));
            }
        }
        if self.adapt_samples < 2 {
            p.push("adapt_samples must be at least 2".into());
        }
        if self.pretrain_samples == 0 {
            p.push("pretrain_samples must be positive".into());
        }
        if self.representation == ReprKind::Table && self.embedding_dim == 0 {
            p.push("embedding_dim must be positive".into());
        }
        check_seeds(&self.seeds, &mut p);
        check_train_config("pretrain", &self.pretrain, false, &mut p);
        check_train_config("finetune", &self.finetune, true, &mut p);
        p
    }

    fn seeds_mut(&mut self) -> Option<&mut Vec<u64>> {
        Some(&mut self.seeds)
    }
    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
    fn workers_mut(&mut self) -> Option<&mut Option<usize>> {
        Some(&mut self.workers)
    }
}

impl Experiment for TransferSpaceExperiment {
    const NAME: &'static str = "transfer-space";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.source.validate("source", &mut p);
        self.target.validate("target", &mut p);
        self.encoding.validate("encoding", &mut p);
        if !self.encoding.kind.is_space_independent() {
            p.push(format!(
                "encoding.kind = \"{}\" depends on the search space; use zcp or hwl",
                self.encoding.kind.name()
            ));
        }
        check_target(self.task, &self.device, "task", &mut p);
        if !(self.source_fraction > 0.0 && self.source_fraction <= 1.0) {
            p.push("source_fraction must lie in (0, 1]".into());
        }
        check_budgets(&self.budgets, &mut p);
        check_seeds(&self.seeds, &mut p);
        check_train_config("pretrain", &self.pretrain, false, &mut p);
        check_train_config("finetune", &self.finetune, true, &mut p);
        p
    }

    fn seeds_mut(&mut self) -> Option<&mut Vec<u64>> {
        Some(&mut self.seeds)
    }
    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
    fn workers_mut(&mut self) -> Option<&mut Option<usize>> {
        Some(&mut self.workers)
    }
}

impl Experiment for SearchExperiment {
    const NAME: &'static str = "search";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.dataset.validate("dataset", &mut p);
        if self.encodings.is_empty() {
            p.push("encodings must not be empty".into());
        }
        for (i, e) in self.encodings.iter().enumerate() {
            e.validate(&format!("encodings[{i}]"), &mut p);
        }
        if self.batch == 0 || self.budget < self.batch {
            p.push(format!(
                "budget {} must be at least batch {} (>= 1)",
                self.budget, self.batch
            ));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            p.push("top_fraction must lie in (0, 1]".into());
        }
        check_seeds(&self.seeds, &mut p);
        check_train_config("predictor", &self.predictor, false, &mut p);
        p
    }

    fn seeds_mut(&mut self) -> Option<&mut Vec<u64>> {
        Some(&mut self.seeds)
    }
    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
    fn workers_mut(&mut self) -> Option<&mut Option<usize>> {
        Some(&mut self.workers)
    }
}

impl Experiment for GenSyntheticExperiment {
    const NAME: &'static str = "gen-synthetic";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.synthetic.validate("synthetic", &mut p);
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            p.push("output must be a plain file name".into());
        }
        p
    }

    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
}

impl Experiment for EvalExperiment {
    const NAME: &'static str = "eval";

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        self.dataset.validate("dataset", &mut p);
        for t in &self.thresholds {
            if !(*t > 0.0 && *t <= 1.0) {
                p.push(format!("threshold {t} outside (0, 1]"));
            }
        }
        if let Some(train) = &self.train_devices {
            for d in &self.test_devices {
                if train.contains(d) {
                    p.push(format!("test device `{d}` is also a training device"));
                }
            }
        }
        if self.buckets
            && (self.bucket_edges.is_empty() || self.bucket_edges.windows(2).any(|w| w[0] >= w[1]))
        {
            p.push("bucket_edges must be strictly increasing and non-empty".into());
        }
        p
    }

    fn out_dir_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out_dir
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse<E: Experiment>(text: &str) -> Result<E> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_train_config_gets_published_defaults() {
        let cfg: TrainExperiment = parse(
            r#"
            budgets = [10, 40, 160]
            seeds = [0, 1, 2, 3, 4]
            [dataset]
            path = "nb201.jsonl"
            [encoding]
            kind = "zcp"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.predictor, TrainConfig::pretrain());
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_finetune_table_keeps_transfer_preset() {
        let cfg: TransferDeviceExperiment = parse(
            r#"
            train_devices = ["a"]
            test_devices = ["b"]
            [dataset]
            path = "x.jsonl"
            [encoding]
            kind = "zcp"
            [pretrain]
            epochs = 10
            [finetune]
            hidden_width = 32
            "#,
        )
        .unwrap();
        assert_eq!(
            cfg.finetune,
            TrainConfig {
                hidden_width: 32,
                ..TrainConfig::transfer()
            }
        );
        assert_eq!(
            cfg.pretrain,
            TrainConfig {
                epochs: 10,
                ..TrainConfig::pretrain()
            }
        );
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let err = parse::<TrainExperiment>("budgets = [1]\nbudget = 3\n").unwrap_err();
        let Error::Config(msgs) = err else { panic!() };
        assert!(msgs[0].starts_with("test.toml:2:"), "{msgs:?}");
    }

    #[test]
    fn diagnostics_collect_every_problem() {
        let cfg: TransferDeviceExperiment = parse(
            r#"
            train_devices = ["a", "b"]
            test_devices = ["b"]
            adapt_samples = 1
            seeds = []
            [dataset]
            [encoding]
            kind = "hwl"
            "#,
        )
        .unwrap();
        let Err(Error::Config(msgs)) = cfg.validate() else {
            panic!()
        };
        let joined = msgs.join("\n");
        for needle in [
            "needs `path`",
            "needs `devices`",
            "also a training device",
            "adapt_samples",
            "seeds",
        ] {
            assert!(joined.contains(needle), "missing {needle}: {joined}");
        }
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a: GenSyntheticExperiment = parse("[synthetic]\nn_archs = 10\n").unwrap();
        let h = a.config_hash();
        *a.out_dir_mut() = Some("elsewhere".into());
        assert_eq!(a.config_hash(), h);
        a.synthetic.seed = 1;
        assert_ne!(a.config_hash(), h);
    }

    #[test]
    fn correlated_devices_hit_their_target() {
        let mut s = SyntheticConfig::new("s", 3000, 2, 3);
        s.correlated.push(CorrelatedDevice {
            name: "near".into(),
            base: "dev0".into(),
            rho: 0.8,
            noise: 0.05,
            avoid: vec!["dev1".into()],
        });
        let spec = s.build().unwrap();
        let near = spec.device("near").unwrap();
        let want = SyntheticSpec::analytic_rho(spec.device("dev0").unwrap(), near);
        assert!((want - 0.8).abs() < 1e-9, "{want}");
        let data = generate_synthetic(&spec).unwrap();
        let m =
            archpred_core::correlation_matrix(&data, archpred_core::ColumnKind::Latency).unwrap();
        let got = m.get_by_label("dev0", "near").unwrap().unwrap();
        assert!((got - 0.8).abs() < 0.05, "{got}");
    }
}
