//! MLP predictors over architecture encodings: scratch training, multi-device
//! pretraining, few-shot device adaptation and cross-space adaptation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::BenchmarkDataset;
use crate::embedding::{DeviceEncoder, DeviceRepr, DonorChoice};
use crate::encoding::{
    encode_into, encoding_dim, fit_normalizer, ArchitectureRecord, EncodingMode, FeatureRange,
    MissingPolicy, Normalizer,
};
use crate::metrics::spearman_rho;
use crate::mlp::{Gradients, MlpParams, Workspace};
use crate::optim::{mlp_groups, AdamWConfig, OptimizerState, ParamGroup};
use crate::rng::{derive_seed, seeded};
use crate::schedule::{cosine_lr, LrSchedule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Accuracy,
    Latency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub min_lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub hidden_width: usize,
    /// Number of affine layers.
    pub depth: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub decay_bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::pretrain()
    }
}

impl TrainConfig {
    /// Width 128, depth 4, 250 epochs, lr 0.004, wd 0.0005, batch 128.
    pub fn pretrain() -> Self {
        Self {
            epochs: 250,
            lr: 0.004,
            min_lr: 0.0,
            weight_decay: 0.0005,
            batch_size: 128,
            seed: 0,
            hidden_width: 128,
            depth: 4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay_bias: false,
        }
    }

    /// 50 epochs at lr 0.0004, otherwise as [`TrainConfig::pretrain`].
    pub fn transfer() -> Self {
        Self {
            epochs: 50,
            lr: 0.0004,
            ..Self::pretrain()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, allow_zero_epochs: bool) -> Result<()> {
        if self.epochs == 0 && !allow_zero_epochs {
            return Err(Error::Argument("epochs must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Argument(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if !(0.0 <= self.min_lr && self.min_lr <= self.lr) {
            return Err(Error::Argument(format!(
                "min_lr must lie in [0, lr], got {}",
                self.min_lr
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Argument("batch_size must be >= 1".into()));
        }
        if self.depth == 0 || (self.depth > 1 && self.hidden_width == 0) {
            return Err(Error::Argument(
                "depth and hidden_width must be positive".into(),
            ));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Argument("weight_decay must be >= 0".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<LrSchedule> {
        LrSchedule::new(self.lr, self.min_lr, self.epochs)
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
            decay_bias: self.decay_bias,
        }
    }

    /// FNV-1a over every field.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.epochs as u64);
        eat(self.lr.to_bits());
        eat(self.min_lr.to_bits());
        eat(self.weight_decay.to_bits());
        eat(self.batch_size as u64);
        eat(self.seed);
        eat(self.hidden_width as u64);
        eat(self.depth as u64);
        eat(self.beta1.to_bits());
        eat(self.beta2.to_bits());
        eat(self.eps.to_bits());
        eat(u64::from(self.decay_bias));
        h
    }
}

/// What to predict, where, and on which architectures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTask {
    pub kind: TargetKind,
    pub space_id: String,
    #[serde(default)]
    pub device_id: Option<String>,
    pub train_ids: Vec<String>,
    #[serde(default)]
    pub eval_ids: Vec<String>,
}

impl PredictionTask {
    pub fn accuracy(
        space_id: impl Into<String>,
        train_ids: Vec<String>,
        eval_ids: Vec<String>,
    ) -> Self {
        Self {
            kind: TargetKind::Accuracy,
            space_id: space_id.into(),
            device_id: None,
            train_ids,
            eval_ids,
        }
    }

    pub fn latency(
        space_id: impl Into<String>,
        device_id: impl Into<String>,
        train_ids: Vec<String>,
        eval_ids: Vec<String>,
    ) -> Self {
        Self {
            kind: TargetKind::Latency,
            space_id: space_id.into(),
            device_id: Some(device_id.into()),
            train_ids,
            eval_ids,
        }
    }

    pub fn validate(&self, dataset: &BenchmarkDataset) -> Result<()> {
        if self.space_id != dataset.space_id() {
            return Err(Error::Integrity(format!(
                "task targets space `{}`, dataset is `{}`",
                self.space_id,
                dataset.space_id()
            )));
        }
        if self.kind == TargetKind::Latency && self.device_id.is_none() {
            return Err(Error::Argument("latency task needs a device id".into()));
        }
        for id in self.train_ids.iter().chain(&self.eval_ids) {
            dataset.require(id)?;
        }
        if let Some(id) = self.train_ids.iter().find(|id| self.eval_ids.contains(id)) {
            return Err(Error::Integrity(format!(
                "`{id}` is in both train and eval sets"
            )));
        }
        Ok(())
    }

    pub fn target(&self, record: &ArchitectureRecord) -> Result<f64> {
        target_of(self.kind, self.device_id.as_deref(), record)
    }
}

fn target_of(kind: TargetKind, device: Option<&str>, record: &ArchitectureRecord) -> Result<f64> {
    let value = match kind {
        TargetKind::Accuracy => record.accuracy,
        TargetKind::Latency => device.and_then(|d| record.latency(d)),
    };
    value.ok_or_else(|| Error::Ingestion {
        arch_id: record.arch_id.clone(),
        feature: match (kind, device) {
            (TargetKind::Accuracy, _) => "accuracy".into(),
            (TargetKind::Latency, Some(d)) => format!("latency:{d}"),
            (TargetKind::Latency, None) => "latency".into(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: u64,
    pub seed: u64,
}

/// A trained predictor and everything needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub mlp: MlpParams,
    pub mode: EncodingMode,
    pub normalizer: Normalizer,
    pub device: Option<DeviceEncoder>,
    pub target: TargetKind,
    /// Targets are min-max scaled with this range during training.
    pub target_scaler: FeatureRange,
    /// Topology-vector length of the space the model reads, for Vec kinds.
    pub vec_len: Option<usize>,
    pub provenance: Provenance,
    /// Mean training loss per epoch of the last training phase.
    pub loss_history: Vec<f64>,
    /// Optimizer state at the end of the last training phase.
    pub optimizer: Option<OptimizerState>,
}

impl PredictorModel {
    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim()
    }

    pub fn device_dim(&self) -> usize {
        self.device.as_ref().map_or(0, DeviceEncoder::dim)
    }

    /// Checks the MLP input against encoding and device widths.
    pub fn check_dims(&self) -> Result<()> {
        let expected = encoding_dim(&self.mode, self.vec_len)? + self.device_dim();
        if expected != self.input_dim() {
            return Err(Error::Shape {
                context: "predictor input",
                expected,
                found: self.input_dim(),
            });
        }
        Ok(())
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.loss_history.last().copied()
    }
}

/// Example with its encoded architecture features, device ordinal and
/// scaled target.
struct Example {
    features: Vec<f64>,
    device: Option<usize>,
    target: f64,
}

/// Which embedding-table rows receive updates.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RowScope {
    All,
    Only(usize),
    Frozen,
}

fn encode_records(
    records: &[&ArchitectureRecord],
    mode: &EncodingMode,
    norm: &Normalizer,
    vec_len: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let dim = encoding_dim(mode, vec_len)?;
    records
        .iter()
        .map(|r| {
            let mut v = Vec::with_capacity(dim);
            encode_into(r, mode, norm, &mut v)?;
            if v.len() != dim {
                return Err(Error::Shape {
                    context: "encoded architecture",
                    expected: dim,
                    found: v.len(),
                });
            }
            Ok(v)
        })
        .collect()
}

fn check_no_target_leak(mode: &EncodingMode, targets: &[&str]) -> Result<()> {
    if mode.kind.uses_latencies() {
        if let Some(d) = targets
            .iter()
            .find(|d| mode.devices.iter().any(|m| m == *d))
        {
            return Err(Error::Argument(format!(
                "target device `{d}` is also an input reference device"
            )));
        }
    }
    Ok(())
}

fn fit(
    model: &mut PredictorModel,
    examples: &[Example],
    config: &TrainConfig,
    scope: RowScope,
) -> Result<()> {
    model.loss_history.clear();
    if config.epochs == 0 {
        return Ok(());
    }
    if examples.is_empty() {
        return Err(Error::Argument("no training examples".into()));
    }
    let schedule = config.schedule()?;
    let adamw = config.adamw();
    let feature_dim = examples[0].features.len();
    let device_dim = model.device_dim();

    let table_rows = match (&model.device, scope) {
        (Some(DeviceEncoder::Table(t)), RowScope::All) => Some((0, t.len())),
        (Some(DeviceEncoder::Table(_)), RowScope::Only(i)) => Some((i, 1)),
        _ => None,
    };
    let mut group_sizes: Vec<usize> = model
        .mlp
        .layers()
        .iter()
        .flat_map(|l| [l.weight.data().len(), l.bias.len()])
        .collect();
    if let Some((_, rows)) = table_rows {
        group_sizes.push(rows * device_dim);
    }
    let mut opt = OptimizerState::new(&group_sizes, &adamw);

    let mut ws = Workspace::new(&model.mlp);
    let mut grads = Gradients::zeros_like(&model.mlp);
    let mut table_grad = vec![0.0; table_rows.map_or(0, |(_, r)| r * device_dim)];
    let mut input_grad = vec![0.0; feature_dim + device_dim];
    let mut x = Vec::with_capacity(feature_dim + device_dim);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = seeded(derive_seed(config.seed, 2));

    for epoch in 0..config.epochs {
        let lr = cosine_lr(&schedule, epoch)?;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.reset();
            table_grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let ex = &examples[i];
                x.clear();
                x.extend_from_slice(&ex.features);
                if let (Some(enc), Some(d)) = (&model.device, ex.device) {
                    enc.write_vector(d, &mut x)?;
                }
                let row_slot = match (table_rows, ex.device) {
                    (Some((first, rows)), Some(d)) if d >= first && d < first + rows => {
                        Some(d - first)
                    }
                    _ => None,
                };
                let (_, sq) = if let Some(slot) = row_slot {
                    input_grad.iter_mut().for_each(|g| *g = 0.0);
                    let out = model.mlp.accumulate(
                        &x,
                        ex.target,
                        scale,
                        &mut ws,
                        &mut grads,
                        Some(&mut input_grad),
                    )?;
                    for (g, v) in table_grad[slot * device_dim..(slot + 1) * device_dim]
                        .iter_mut()
                        .zip(&input_grad[feature_dim..])
                    {
                        *g += v;
                    }
                    out
                } else {
                    model
                        .mlp
                        .accumulate(&x, ex.target, scale, &mut ws, &mut grads, None)?
                };
                epoch_loss += sq;
            }
            let mut groups = mlp_groups(&mut model.mlp, &grads, adamw.decay_bias);
            if let (Some((first, rows)), Some(DeviceEncoder::Table(t))) =
                (table_rows, model.device.as_mut())
            {
                let dim = t.dim();
                groups.push(ParamGroup {
                    values: &mut t.data_mut()[first * dim..(first + rows) * dim],
                    grads: &table_grad,
                    decay: true,
                });
                opt.step(&mut groups, lr)?;
            } else {
                opt.step(&mut groups, lr)?;
            }
        }
        let mean = epoch_loss / examples.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Numeric {
                context: "training loss at epoch".into(),
                index: epoch,
            });
        }
        model.loss_history.push(mean);
    }
    model.optimizer = Some(opt);
    Ok(())
}

/// Trains a fresh model on explicit `(record, target)` pairs. The normalizer
/// is fitted on `normalizer_reference` when given (e.g. the full candidate
/// pool, whose proxy scores are free to compute), else on the training records.
pub fn train_on_samples(
    records: &[&ArchitectureRecord],
    targets: &[f64],
    kind: TargetKind,
    mode: &EncodingMode,
    vec_len: Option<usize>,
    config: &TrainConfig,
    normalizer_reference: Option<&[&ArchitectureRecord]>,
) -> Result<PredictorModel> {
    config.validate(false)?;
    mode.validate()?;
    if records.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    if records.len() != targets.len() {
        return Err(Error::Shape {
            context: "training targets",
            expected: records.len(),
            found: targets.len(),
        });
    }
    let reference = normalizer_reference.unwrap_or(records);
    let normalizer = fit_normalizer(reference.iter().copied(), mode, MissingPolicy::Error)?;
    let target_scaler =
        FeatureRange::fit(targets.iter().copied()).ok_or_else(|| Error::Numeric {
            context: "training targets".into(),
            index: targets.iter().position(|t| !t.is_finite()).unwrap_or(0),
        })?;
    let features = encode_records(records, mode, &normalizer, vec_len)?;
    let input_dim = encoding_dim(mode, vec_len)?;
    let mlp = MlpParams::init(
        input_dim,
        config.hidden_width,
        config.depth,
        &mut seeded(derive_seed(config.seed, 1)),
    )?;
    let mut model = PredictorModel {
        mlp,
        mode: mode.clone(),
        normalizer,
        device: None,
        target: kind,
        target_scaler,
        vec_len,
        provenance: Provenance {
            config_hash: config.fingerprint(),
            seed: config.seed,
        },
        loss_history: Vec::new(),
        optimizer: None,
    };
    let examples: Vec<Example> = features
        .into_iter()
        .zip(targets)
        .map(|(features, &t)| Example {
            features,
            device: None,
            target: target_scaler.scale(t),
        })
        .collect();
    fit(&mut model, &examples, config, RowScope::Frozen)?;
    Ok(model)
}

/// Trains a predictor from scratch on the task's training architectures.
pub fn train_scratch(
    dataset: &BenchmarkDataset,
    task: &PredictionTask,
    mode: &EncodingMode,
    config: &TrainConfig,
) -> Result<PredictorModel> {
    task.validate(dataset)?;
    if task.train_ids.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    if let Some(d) = &task.device_id {
        check_no_target_leak(mode, &[d.as_str()])?;
    }
    let records: Vec<&ArchitectureRecord> = task
        .train_ids
        .iter()
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    let targets: Vec<f64> = records
        .iter()
        .map(|r| task.target(r))
        .collect::<Result<_>>()?;
    train_on_samples(
        &records,
        &targets,
        task.kind,
        mode,
        dataset.vec_len(),
        config,
        None,
    )
}

/// Trains one latency predictor over several devices, with each device's
/// representation concatenated to the architecture encoding.
pub fn pretrain_devices(
    dataset: &BenchmarkDataset,
    devices: &[String],
    train_ids: &[String],
    mode: &EncodingMode,
    repr: &DeviceRepr,
    config: &TrainConfig,
) -> Result<PredictorModel> {
    config.validate(false)?;
    mode.validate()?;
    if train_ids.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    let device_refs: Vec<&str> = devices.iter().map(String::as_str).collect();
    check_no_target_leak(mode, &device_refs)?;
    let records: Vec<&ArchitectureRecord> = train_ids
        .iter()
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    let normalizer = fit_normalizer(records.iter().copied(), mode, MissingPolicy::Error)?;
    let features = encode_records(&records, mode, &normalizer, dataset.vec_len())?;
    let encoder = DeviceEncoder::build(
        repr,
        devices,
        |d, a| dataset.get(a).and_then(|r| r.latency(d)),
        &mut seeded(derive_seed(config.seed, 3)),
    )?;

    let mut raw = Vec::with_capacity(records.len() * devices.len());
    for (ri, r) in records.iter().enumerate() {
        for (di, d) in devices.iter().enumerate() {
            let t = target_of(TargetKind::Latency, Some(d), r)?;
            raw.push((ri, di, t));
        }
    }
    let target_scaler = FeatureRange::fit(raw.iter().map(|(_, _, t)| *t))
        .ok_or_else(|| Error::Argument("no latency targets".into()))?;
    let input_dim = encoding_dim(mode, dataset.vec_len())? + encoder.dim();
    let mlp = MlpParams::init(
        input_dim,
        config.hidden_width,
        config.depth,
        &mut seeded(derive_seed(config.seed, 1)),
    )?;
    let mut model = PredictorModel {
        mlp,
        mode: mode.clone(),
        normalizer,
        device: Some(encoder),
        target: TargetKind::Latency,
        target_scaler,
        vec_len: dataset.vec_len(),
        provenance: Provenance {
            config_hash: config.fingerprint(),
            seed: config.seed,
        },
        loss_history: Vec::new(),
        optimizer: None,
    };
    let examples: Vec<Example> = raw
        .into_iter()
        .map(|(ri, di, t)| Example {
            features: features[ri].clone(),
            device: Some(di),
            target: target_scaler.scale(t),
        })
        .collect();
    fit(&mut model, &examples, config, RowScope::All)?;
    Ok(model)
}

/// Result of adapting a multi-device predictor to a new device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceAdaptation {
    pub model: PredictorModel,
    /// Donor chosen for embedding-table models.
    pub donor: Option<DonorChoice>,
}

/// Registers `device_id` and fine-tunes on its measured latencies for the
/// `sample_ids` architectures. For embedding tables the new row starts as a
/// copy of the best-correlated training row, and is the only row updated.
pub fn finetune_device(
    model: &PredictorModel,
    dataset: &BenchmarkDataset,
    device_id: &str,
    sample_ids: &[String],
    config: &TrainConfig,
) -> Result<DeviceAdaptation> {
    config.validate(true)?;
    if model.device.is_none() {
        return Err(Error::State(
            "model has no device representation to extend".into(),
        ));
    }
    check_no_target_leak(&model.mode, &[device_id])?;
    let records: Vec<&ArchitectureRecord> = sample_ids
        .iter()
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    let mut missing = Vec::new();
    let mut samples = Vec::with_capacity(records.len());
    for r in &records {
        match r.latency(device_id) {
            Some(ms) => samples.push((r.arch_id.clone(), ms)),
            None => missing.push(r.arch_id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Data {
            context: format!("new device `{device_id}` lacks sampled measurements"),
            missing,
        });
    }
    let mut adapted = model.clone();
    adapted.provenance = Provenance {
        config_hash: config.fingerprint(),
        seed: config.seed,
    };
    let encoder = adapted.device.as_mut().expect("checked above");
    let donor = encoder.register_new(device_id, &samples, |d, a| {
        dataset.get(a).and_then(|r| r.latency(d))
    })?;
    let ordinal = encoder.ordinal(device_id)?;
    let features = encode_records(
        &records,
        &adapted.mode,
        &adapted.normalizer,
        adapted.vec_len,
    )?;
    let examples: Vec<Example> = features
        .into_iter()
        .zip(&samples)
        .map(|(features, (_, ms))| Example {
            features,
            device: Some(ordinal),
            target: adapted.target_scaler.scale(*ms),
        })
        .collect();
    fit(&mut adapted, &examples, config, RowScope::Only(ordinal))?;
    Ok(DeviceAdaptation {
        model: adapted,
        donor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpaceTransferOptions {
    /// Refit the feature normalizer on the target samples instead of reusing
    /// the source normalizer.
    pub refit_normalizer: bool,
}

/// Fine-tunes a ZCP or HWL predictor on a few samples from another search
/// space (or task). Topology-bearing encodings cannot transfer.
pub fn finetune_space(
    model: &PredictorModel,
    dataset: &BenchmarkDataset,
    task: &PredictionTask,
    config: &TrainConfig,
    options: SpaceTransferOptions,
) -> Result<PredictorModel> {
    if !model.mode.kind.is_space_independent() {
        return Err(Error::UnsupportedTransfer(format!(
            "{} encoding depends on the search space topology",
            model.mode.kind.name()
        )));
    }
    if model.device.is_some() {
        return Err(Error::State(
            "device-conditioned predictors adapt across spaces per device; train one per device"
                .into(),
        ));
    }
    config.validate(true)?;
    task.validate(dataset)?;
    if task.train_ids.is_empty() {
        return Err(Error::Argument("no target samples".into()));
    }
    if let Some(d) = &task.device_id {
        check_no_target_leak(&model.mode, &[d.as_str()])?;
    }
    let records: Vec<&ArchitectureRecord> = task
        .train_ids
        .iter()
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    let targets: Vec<f64> = records
        .iter()
        .map(|r| task.target(r))
        .collect::<Result<_>>()?;
    let mut adapted = model.clone();
    adapted.target = task.kind;
    adapted.vec_len = None;
    adapted.provenance = Provenance {
        config_hash: config.fingerprint(),
        seed: config.seed,
    };
    if options.refit_normalizer {
        adapted.normalizer = fit_normalizer(
            records.iter().copied(),
            &adapted.mode,
            model.normalizer.missing,
        )?;
    }
    adapted.target_scaler =
        FeatureRange::fit(targets.iter().copied()).ok_or_else(|| Error::Numeric {
            context: "target samples".into(),
            index: 0,
        })?;
    let features = encode_records(&records, &adapted.mode, &adapted.normalizer, None)?;
    let scaler = adapted.target_scaler;
    let examples: Vec<Example> = features
        .into_iter()
        .zip(&targets)
        .map(|(features, &t)| Example {
            features,
            device: None,
            target: scaler.scale(t),
        })
        .collect();
    fit(&mut adapted, &examples, config, RowScope::Frozen)?;
    Ok(adapted)
}

/// Predictions in native target units. `device_id` must be given exactly
/// when the model is device-conditioned.
pub fn predict(
    model: &PredictorModel,
    records: &[&ArchitectureRecord],
    device_id: Option<&str>,
) -> Result<Vec<f64>> {
    model.check_dims()?;
    let device = match (&model.device, device_id) {
        (Some(enc), Some(id)) => Some(enc.vector(id)?),
        (None, None) => None,
        (Some(_), None) => {
            return Err(Error::Argument(
                "device-conditioned model needs a device id".into(),
            ))
        }
        (None, Some(id)) => {
            return Err(Error::Argument(format!(
                "model has no device representation, got device `{id}`"
            )))
        }
    };
    let mut ws = Workspace::new(&model.mlp);
    let mut x = Vec::with_capacity(model.input_dim());
    records
        .iter()
        .map(|r| {
            encode_into(r, &model.mode, &model.normalizer, &mut x)?;
            if let Some(d) = &device {
                x.extend_from_slice(d);
            }
            let y = model.mlp.forward_with(&x, &mut ws)?;
            Ok(model.target_scaler.unscale(y))
        })
        .collect()
}

/// Spearman-ρ between predictions and ground truth on `ids`.
pub fn eval_spearman(
    model: &PredictorModel,
    dataset: &BenchmarkDataset,
    ids: &[String],
    device_id: Option<&str>,
) -> Result<f64> {
    let records: Vec<&ArchitectureRecord> = ids
        .iter()
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    let truth: Vec<f64> = records
        .iter()
        .map(|r| target_of(model.target, device_id, r))
        .collect::<Result<_>>()?;
    // A single-device model is evaluated against `device_id` without conditioning on it.
    let condition = if model.device.is_some() {
        device_id
    } else {
        None
    };
    let preds = predict(model, &records, condition)?;
    spearman_rho(&preds, &truth)
}
