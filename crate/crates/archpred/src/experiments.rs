//! One function per subcommand. Each returns its artifacts in memory so the
//! caller decides where (and whether) they are written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use archpred_core::metrics::{closest_train_device, DeviceSplit};
use archpred_core::predictor::eval_spearman;
use archpred_core::{
    build_adversarial_split, correlation_matrix, finetune_device, finetune_space,
    generate_synthetic, make_split, pretrain_devices, run_search, train_scratch, BenchmarkDataset,
    ColumnKind, CorrelationMatrix, PredictionTask, SearchConfig, SpaceTransferOptions, Split,
    SplitSize, TargetKind,
};

use crate::checkpoint::checkpoint_bytes;
use crate::config::{
    EvalExperiment, Experiment, GenSyntheticExperiment, SearchExperiment, TrainExperiment,
    TransferDeviceExperiment, TransferSpaceExperiment,
};
use crate::error::{Error, Result};
use crate::io::{dataset_bytes, schema_text};
use crate::output::{fmt_f64, fmt_opt, write_atomic, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Table { name: String, table: Table },
    File { name: String, bytes: Vec<u8> },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Self::Table { name, .. } | Self::File { name, .. } => name,
        }
    }

    pub fn table(&self) -> Option<&Table> {
        match self {
            Self::Table { table, .. } => Some(table),
            Self::File { .. } => None,
        }
    }

    fn bytes(&self, config_hash: &str) -> Result<Vec<u8>> {
        match self {
            Self::Table { table, .. } => table.to_bytes(config_hash),
            Self::File { bytes, .. } => Ok(bytes.clone()),
        }
    }
}

fn table(name: &str, table: Table) -> Artifact {
    Artifact::Table {
        name: name.into(),
        table,
    }
}

/// Where relative dataset paths resolve and how many seeds run at once.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub data_root: PathBuf,
    pub workers: usize,
}

impl Default for RunContext {
    fn default() -> Self {
        Self {
            data_root: PathBuf::from("."),
            workers: 1,
        }
    }
}

/// Writes every artifact atomically and reads it back to confirm the bytes.
pub fn write_artifacts(
    out_dir: &Path,
    config_hash: &str,
    artifacts: &[Artifact],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = out_dir.join(a.name());
        let bytes = a.bytes(config_hash)?;
        write_atomic(&path, &bytes)?;
        let back = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if back != bytes {
            return Err(Error::io(
                &path,
                std::io::Error::new(std::io::ErrorKind::InvalidData, "read-back mismatch"),
            ));
        }
        written.push(path);
    }
    Ok(written)
}

/// Runs `f` for every seed on up to `workers` threads; results keep seed order.
pub fn run_seeds<T, F>(seeds: &[u64], workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let workers = workers.clamp(1, seeds.len().max(1));
    if workers == 1 {
        return seeds.iter().map(|&s| f(s)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..seeds.len()).map(|_| None).collect());
    let panicked = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&seed) = seeds.get(i) else { break };
                    let r = f(seed);
                    slots.lock().expect("no poisoned slots")[i] = Some(r);
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join()).any(|r| r.is_err())
    });
    if panicked {
        return Err(Error::Worker);
    }
    slots
        .into_inner()
        .map_err(|_| Error::Worker)?
        .into_iter()
        .map(|s| s.ok_or(Error::Worker)?)
        .collect()
}

fn eval_set(rest: &[String], cap: Option<usize>) -> Result<Vec<String>> {
    let n = cap.map_or(rest.len(), |c| c.min(rest.len()));
    if n < 2 {
        return Err(Error::config(format!(
            "only {n} architectures left for evaluation; lower the training budget"
        )));
    }
    Ok(rest[..n].to_vec())
}

fn task(
    kind: TargetKind,
    space: &str,
    device: Option<&str>,
    train: Vec<String>,
    eval: Vec<String>,
) -> PredictionTask {
    match (kind, device) {
        (TargetKind::Latency, Some(d)) => PredictionTask::latency(space, d, train, eval),
        _ => PredictionTask::accuracy(space, train, eval),
    }
}

fn check_devices(data: &BenchmarkDataset, key: &str, devices: &[String]) -> Result<()> {
    let missing: Vec<String> = devices
        .iter()
        .filter(|d| !data.devices().contains(d))
        .map(|d| format!("{key}: device `{d}` not in dataset `{}`", data.space_id()))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(missing))
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

pub fn cmd_train(cfg: &TrainExperiment, ctx: &RunContext) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let data = cfg.dataset.load(&ctx.data_root)?;
    if let Some(d) = &cfg.device {
        check_devices(&data, "device", std::slice::from_ref(d))?;
    }
    let mode = cfg.encoding.resolve(&[&data])?;
    let hash = cfg.config_hash();
    let per_seed = run_seeds(&cfg.seeds, ctx.workers, |seed| {
        let mut rows = Vec::with_capacity(cfg.budgets.len());
        for &budget in &cfg.budgets {
            let split = make_split(&data, SplitSize::Count(budget), seed)?;
            let eval = eval_set(&split.eval, cfg.eval_size)?;
            let t = task(
                cfg.target,
                data.space_id(),
                cfg.device.as_deref(),
                split.train,
                eval.clone(),
            );
            let model = train_scratch(&data, &t, &mode, &cfg.predictor.clone().with_seed(seed))?;
            let rho = eval_spearman(&model, &data, &eval, cfg.device.as_deref())?;
            log::info!(
                "train {} budget {budget} seed {seed}: rho {rho:.4}",
                mode.kind.name()
            );
            let ckpt = cfg
                .save_checkpoints
                .then(|| checkpoint_bytes(&model, Some(&hash)))
                .transpose()?;
            rows.push((budget, rho, ckpt));
        }
        Ok(rows)
    })?;
    let mut out = Table::new(&["mode", "budget", "seed", "spearman_rho"]);
    let mut files = Vec::new();
    for (&seed, rows) in cfg.seeds.iter().zip(per_seed) {
        for (budget, rho, ckpt) in rows {
            out.push(vec![
                mode.kind.name().into(),
                budget.to_string(),
                seed.to_string(),
                fmt_f64(rho),
            ]);
            if let Some(bytes) = ckpt {
                files.push(Artifact::File {
                    name: format!("model_b{budget}_s{seed}.json"),
                    bytes,
                });
            }
        }
    }
    let mut artifacts = vec![table("train.csv", out)];
    artifacts.extend(files);
    Ok(artifacts)
}

struct DeviceRow {
    device: String,
    donor: Option<(String, f64)>,
    transfer: f64,
    scratch: Option<f64>,
}

pub fn cmd_transfer_device(
    cfg: &TransferDeviceExperiment,
    ctx: &RunContext,
) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let data = cfg.dataset.load(&ctx.data_root)?;
    check_devices(&data, "train_devices", &cfg.train_devices)?;
    check_devices(&data, "test_devices", &cfg.test_devices)?;
    let mode = cfg.encoding.resolve(&[&data])?;
    if cfg.pretrain_samples + cfg.adapt_samples + 2 > data.len() {
        return Err(Error::config(format!(
            "pretrain_samples + adapt_samples leave fewer than 2 of {} architectures for evaluation",
            data.len()
        )));
    }
    let hash = cfg.config_hash();
    let per_seed = run_seeds(&cfg.seeds, ctx.workers, |seed| {
        let Split { train, eval: rest } =
            make_split(&data, SplitSize::Count(cfg.pretrain_samples), seed)?;
        let adapt = rest[..cfg.adapt_samples].to_vec();
        let eval = eval_set(&rest[cfg.adapt_samples..], cfg.eval_size)?;
        let repr = cfg.repr(&adapt);
        let model = pretrain_devices(
            &data,
            &cfg.train_devices,
            &train,
            &mode,
            &repr,
            &cfg.pretrain.clone().with_seed(seed),
        )?;
        let ckpt = cfg
            .save_checkpoints
            .then(|| checkpoint_bytes(&model, Some(&hash)))
            .transpose()?;
        let mut rows = Vec::with_capacity(cfg.test_devices.len());
        for device in &cfg.test_devices {
            let adapted = finetune_device(
                &model,
                &data,
                device,
                &adapt,
                &cfg.finetune.clone().with_seed(seed),
            )?;
            let transfer = eval_spearman(&adapted.model, &data, &eval, Some(device))?;
            let scratch = if cfg.scratch_baseline {
                let t = PredictionTask::latency(
                    data.space_id(),
                    device.clone(),
                    adapt.clone(),
                    eval.clone(),
                );
                let m = train_scratch(&data, &t, &mode, &cfg.pretrain.clone().with_seed(seed))?;
                Some(eval_spearman(&m, &data, &eval, Some(device))?)
            } else {
                None
            };
            log::info!(
                "transfer-device {device} seed {seed}: rho {transfer:.4} scratch {scratch:?}"
            );
            rows.push(DeviceRow {
                device: device.clone(),
                donor: adapted.donor.map(|d| (d.donor, d.rho)),
                transfer,
                scratch,
            });
        }
        Ok((rows, ckpt))
    })?;

    let mut out = Table::new(&[
        "seed",
        "device",
        "donor",
        "donor_rho",
        "spearman_rho",
        "scratch_rho",
    ]);
    let mut files = Vec::new();
    let mut by_device: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (&seed, (rows, ckpt)) in cfg.seeds.iter().zip(&per_seed) {
        for r in rows {
            out.push(vec![
                seed.to_string(),
                r.device.clone(),
                r.donor
                    .as_ref()
                    .map_or_else(String::new, |(d, _)| d.clone()),
                fmt_opt(r.donor.as_ref().map(|(_, rho)| *rho)),
                fmt_f64(r.transfer),
                fmt_opt(r.scratch),
            ]);
            let e = by_device.entry(&r.device).or_default();
            e.0.push(r.transfer);
            e.1.extend(r.scratch);
        }
        if let Some(bytes) = ckpt {
            files.push(Artifact::File {
                name: format!("pretrained_s{seed}.json"),
                bytes: bytes.clone(),
            });
        }
    }
    let mean_of = |pick: usize| -> Option<f64> {
        let all: Vec<f64> = cfg
            .test_devices
            .iter()
            .flat_map(|d| {
                let (t, s) = &by_device[d.as_str()];
                if pick == 0 {
                    t.clone()
                } else {
                    s.clone()
                }
            })
            .collect();
        (!all.is_empty()).then(|| mean(all))
    };
    for d in &cfg.test_devices {
        let (t, s) = &by_device[d.as_str()];
        out.push(vec![
            "mean".into(),
            d.clone(),
            String::new(),
            String::new(),
            fmt_f64(mean(t.iter().copied())),
            fmt_opt((!s.is_empty()).then(|| mean(s.iter().copied()))),
        ]);
    }
    out.push(vec![
        "mean".into(),
        "mean".into(),
        String::new(),
        String::new(),
        fmt_opt(mean_of(0)),
        fmt_opt(mean_of(1)),
    ]);
    let mut artifacts = vec![table("transfer_device.csv", out)];
    artifacts.extend(files);
    Ok(artifacts)
}

pub fn cmd_transfer_space(
    cfg: &TransferSpaceExperiment,
    ctx: &RunContext,
) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let source = cfg.source.load(&ctx.data_root)?;
    let target = cfg.target.load(&ctx.data_root)?;
    if let Some(d) = &cfg.device {
        check_devices(&source, "device", std::slice::from_ref(d))?;
        check_devices(&target, "device", std::slice::from_ref(d))?;
    }
    let mode = cfg.encoding.resolve(&[&source, &target])?;
    let options = SpaceTransferOptions {
        refit_normalizer: cfg.refit_normalizer,
    };
    let device = cfg.device.as_deref();
    if cfg.source_fraction >= 1.0 {
        log::warn!(
            "source_fraction {} trains on every source architecture and holds none out",
            cfg.source_fraction
        );
    }
    let per_seed = run_seeds(&cfg.seeds, ctx.workers, |seed| {
        let src_split = make_split(&source, SplitSize::Fraction(cfg.source_fraction), seed)?;
        let src_task = task(
            cfg.task,
            source.space_id(),
            device,
            src_split.train,
            Vec::new(),
        );
        let model = train_scratch(
            &source,
            &src_task,
            &mode,
            &cfg.pretrain.clone().with_seed(seed),
        )?;
        let mut rows = Vec::with_capacity(cfg.budgets.len());
        for &budget in &cfg.budgets {
            let split = make_split(&target, SplitSize::Count(budget), seed)?;
            let eval = eval_set(&split.eval, cfg.eval_size)?;
            let t = task(
                cfg.task,
                target.space_id(),
                device,
                split.train,
                eval.clone(),
            );
            let adapted = finetune_space(
                &model,
                &target,
                &t,
                &cfg.finetune.clone().with_seed(seed),
                options,
            )?;
            let transfer = eval_spearman(&adapted, &target, &eval, device)?;
            let scratch = if cfg.scratch_baseline {
                let m = train_scratch(&target, &t, &mode, &cfg.pretrain.clone().with_seed(seed))?;
                Some(eval_spearman(&m, &target, &eval, device)?)
            } else {
                None
            };
            log::info!(
                "transfer-space budget {budget} seed {seed}: rho {transfer:.4} scratch {scratch:?}"
            );
            rows.push((budget, transfer, scratch));
        }
        Ok(rows)
    })?;
    let mut out = Table::new(&["budget", "seed", "spearman_rho", "scratch_rho"]);
    for (bi, &budget) in cfg.budgets.iter().enumerate() {
        for (&seed, rows) in cfg.seeds.iter().zip(&per_seed) {
            let (_, t, s) = rows[bi];
            out.push(vec![
                budget.to_string(),
                seed.to_string(),
                fmt_f64(t),
                fmt_opt(s),
            ]);
        }
        let t = mean(per_seed.iter().map(|r| r[bi].1));
        let s = cfg
            .scratch_baseline
            .then(|| mean(per_seed.iter().filter_map(|r| r[bi].2)));
        out.push(vec![
            budget.to_string(),
            "mean".into(),
            fmt_f64(t),
            fmt_opt(s),
        ]);
    }
    Ok(vec![table("transfer_space.csv", out)])
}

pub fn cmd_search(cfg: &SearchExperiment, ctx: &RunContext) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let data = cfg.dataset.load(&ctx.data_root)?;
    let mut accs: Vec<f64> = data.records().iter().filter_map(|r| r.accuracy).collect();
    if accs.is_empty() {
        return Err(Error::config("search needs a dataset with accuracies"));
    }
    accs.sort_by(|a, b| b.total_cmp(a));
    let top_k = ((cfg.top_fraction * accs.len() as f64).ceil() as usize).clamp(1, accs.len());
    let threshold = accs[top_k - 1];
    let censored = (cfg.budget + 1) as f64;

    let mut trace = Table::new(&[
        "encoding",
        "seed",
        "round",
        "samples_used",
        "best_target",
        "train_loss",
    ]);
    let mut summary = Table::new(&["encoding", "round", "samples_used", "median_best_target"]);
    let mut efficiency = Table::new(&["encoding", "seed", "samples_to_top", "reached"]);
    for enc in &cfg.encodings {
        let mode = enc.resolve(&[&data])?;
        let name = mode.kind.name();
        let search = SearchConfig {
            mode,
            budget: cfg.budget,
            batch: cfg.batch,
            predictor: cfg.predictor.clone(),
        };
        let states = run_seeds(&cfg.seeds, ctx.workers, |seed| {
            let s = run_search(&data, &search, seed)?;
            log::info!("search {name} seed {seed}: best {:?}", s.best_so_far);
            Ok(s)
        })?;
        let mut reach = Vec::with_capacity(states.len());
        for (&seed, s) in cfg.seeds.iter().zip(&states) {
            for h in &s.history {
                trace.push(vec![
                    name.into(),
                    seed.to_string(),
                    h.round.to_string(),
                    h.samples_used.to_string(),
                    fmt_f64(h.best_target),
                    fmt_opt(h.train_loss),
                ]);
            }
            let n = s.samples_to_reach(threshold);
            reach.push(n.map_or(censored, |n| n as f64));
            efficiency.push(vec![
                name.into(),
                seed.to_string(),
                n.map_or_else(|| censored.to_string(), |n| n.to_string()),
                n.is_some().to_string(),
            ]);
        }
        efficiency.push(vec![
            name.into(),
            "median".into(),
            fmt_f64(median(&mut reach)),
            String::new(),
        ]);
        let rounds = states.iter().map(|s| s.history.len()).max().unwrap_or(0);
        for r in 0..rounds {
            let mut best: Vec<f64> = states
                .iter()
                .filter_map(|s| s.history.get(r))
                .map(|h| h.best_target)
                .collect();
            let used = states
                .iter()
                .filter_map(|s| s.history.get(r))
                .map(|h| h.samples_used)
                .max()
                .unwrap_or(0);
            summary.push(vec![
                name.into(),
                (r + 1).to_string(),
                used.to_string(),
                fmt_f64(median(&mut best)),
            ]);
        }
    }
    Ok(vec![
        table("search_trace.csv", trace),
        table("search_summary.csv", summary),
        table("search_efficiency.csv", efficiency),
    ])
}

pub fn cmd_gen_synthetic(cfg: &GenSyntheticExperiment) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let spec = cfg.synthetic.build()?;
    let data = generate_synthetic(&spec)?;
    let stem = Path::new(&cfg.output)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut artifacts = vec![Artifact::File {
        name: cfg.output.clone(),
        bytes: dataset_bytes(&data),
    }];
    if let Some(schema) = data.schema() {
        artifacts.push(Artifact::File {
            name: format!("{stem}.schema.toml"),
            bytes: schema_text(schema).into_bytes(),
        });
    }
    let mut spec_json = serde_json::to_vec_pretty(&spec).expect("spec serializes");
    spec_json.push(b'\n');
    artifacts.push(Artifact::File {
        name: format!("{stem}.spec.json"),
        bytes: spec_json,
    });
    Ok(artifacts)
}

fn matrix_table(m: &CorrelationMatrix, cell: impl Fn(Option<f64>) -> String) -> Table {
    let mut header = vec!["label".to_string()];
    header.extend(m.labels.iter().cloned());
    let mut t = Table::new(&header);
    for (i, l) in m.labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend((0..m.labels.len()).map(|j| cell(m.get(i, j))));
        t.push(row);
    }
    t
}

fn bucket(edges: &[f64]) -> impl Fn(Option<f64>) -> String + '_ {
    move |v| {
        v.map_or_else(String::new, |v| {
            edges.iter().filter(|e| v >= **e).count().to_string()
        })
    }
}

pub fn cmd_eval(cfg: &EvalExperiment, ctx: &RunContext) -> Result<Vec<Artifact>> {
    cfg.validate()?;
    let data = cfg.dataset.load(&ctx.data_root)?;
    check_devices(&data, "test_devices", &cfg.test_devices)?;
    if let Some(train) = &cfg.train_devices {
        check_devices(&data, "train_devices", train)?;
    }
    if !cfg.thresholds.is_empty() && cfg.test_devices.is_empty() {
        return Err(Error::config("thresholds need test_devices"));
    }
    let mut artifacts = Vec::new();
    if data.devices().len() >= 2 {
        let m = correlation_matrix(&data, ColumnKind::Latency)?;
        artifacts.push(table("device_correlation.csv", matrix_table(&m, fmt_opt)));
        if cfg.buckets {
            artifacts.push(table(
                "device_correlation_buckets.csv",
                matrix_table(&m, bucket(&cfg.bucket_edges)),
            ));
        }
        if !cfg.test_devices.is_empty() {
            let train = cfg.train_devices.clone().unwrap_or_else(|| {
                data.devices()
                    .iter()
                    .filter(|d| !cfg.test_devices.contains(d))
                    .cloned()
                    .collect()
            });
            let split = DeviceSplit::new(train, cfg.test_devices.clone(), &m)?;
            let mut t = Table::new(&["test_device", "closest_train_device", "rho"]);
            for c in closest_train_device(&split, &m)? {
                t.push(vec![c.test, c.donor.unwrap_or_default(), fmt_f64(c.rho)]);
            }
            artifacts.push(table("closest_train.csv", t));
        }
        if !cfg.thresholds.is_empty() {
            let mut t = Table::new(&["threshold", "device", "role", "max_rho_to_other_side"]);
            for &thr in &cfg.thresholds {
                match build_adversarial_split(&m, &cfg.test_devices, thr) {
                    Ok(split) => {
                        for d in &split.train {
                            let max = split
                                .test
                                .iter()
                                .filter_map(|x| m.get_by_label(d, x).ok().flatten())
                                .fold(None, |acc: Option<f64>, v| {
                                    Some(acc.map_or(v, |a| a.max(v)))
                                });
                            t.push(vec![fmt_f64(thr), d.clone(), "train".into(), fmt_opt(max)]);
                        }
                        for (d, max) in &split.max_train_rho {
                            t.push(vec![fmt_f64(thr), d.clone(), "test".into(), fmt_opt(*max)]);
                        }
                    }
                    Err(archpred_core::Error::InfeasibleSplit { .. }) => {
                        t.push(vec![
                            fmt_f64(thr),
                            String::new(),
                            "infeasible".into(),
                            String::new(),
                        ]);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            artifacts.push(table("adversarial_split.csv", t));
        }
    } else if !cfg.test_devices.is_empty() {
        return Err(Error::config("device reports need at least two devices"));
    }
    if !data.proxies().is_empty() {
        let m = correlation_matrix(&data, ColumnKind::Proxy)?;
        artifacts.push(table("proxy_correlation.csv", matrix_table(&m, fmt_opt)));
        if cfg.buckets {
            artifacts.push(table(
                "proxy_correlation_buckets.csv",
                matrix_table(&m, bucket(&cfg.bucket_edges)),
            ));
        }
    }
    if artifacts.is_empty() {
        return Err(Error::config(
            "dataset has neither two devices nor any proxies to correlate",
        ));
    }
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_results_keep_seed_order() {
        let seeds: Vec<u64> = (0..17).rev().collect();
        let out = run_seeds(&seeds, 4, |s| Ok(s * 10)).unwrap();
        assert_eq!(out, seeds.iter().map(|s| s * 10).collect::<Vec<_>>());
    }

    #[test]
    fn first_error_in_seed_order_wins() {
        let err = run_seeds(&[0, 1, 2, 3], 3, |s| {
            if s >= 2 {
                Err(Error::config(format!("seed {s}")))
            } else {
                Ok(s)
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("seed 2"), "{err}");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
