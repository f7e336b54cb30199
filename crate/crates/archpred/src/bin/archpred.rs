use std::path::{Path, PathBuf};
use std::process::ExitCode;

use archpred::config::{
    parse_config, EvalExperiment, Experiment, GenSyntheticExperiment, SearchExperiment,
    TrainExperiment, TransferDeviceExperiment, TransferSpaceExperiment,
};
use archpred::experiments::{
    cmd_eval, cmd_gen_synthetic, cmd_search, cmd_train, cmd_transfer_device, cmd_transfer_space,
    write_artifacts, Artifact, RunContext,
};
use archpred::Result;
use clap::{Args, Parser, Subcommand};

/// Architecture performance predictors: training, transfer and search experiments.
#[derive(Parser)]
#[command(name = "archpred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train scratch predictors over a grid of sample budgets.
    Train(Common),
    /// Pretrain on some devices and adapt to held-out devices.
    TransferDevice(Common),
    /// Pretrain on one search space and fine-tune on another.
    TransferSpace(Common),
    /// Predictor-guided architecture search.
    Search(Common),
    /// Write a synthetic benchmark dataset.
    GenSynthetic(Common),
    /// Correlation reports and adversarial device splits.
    Eval(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated seeds; override the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Seeds run in parallel; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "info")]
    log_level: log::LevelFilter,
    /// Root for relative dataset paths (default: the config's directory).
    #[arg(long, env = "ARCHPRED_DATA_ROOT")]
    data_root: Option<PathBuf>,
}

fn run<E: Experiment>(
    common: &Common,
    exec: impl FnOnce(&E, &RunContext) -> Result<Vec<Artifact>>,
) -> Result<()> {
    let mut cfg: E = parse_config(&common.config)?;
    if let Some(dir) = &common.out_dir {
        *cfg.out_dir_mut() = Some(dir.clone());
    }
    if let (Some(seeds), Some(slot)) = (&common.seeds, cfg.seeds_mut()) {
        *slot = seeds.clone();
    }
    if let (Some(w), Some(slot)) = (common.workers, cfg.workers_mut()) {
        *slot = Some(w);
    }
    cfg.validate()?;
    let config_dir = common.config.parent().unwrap_or(Path::new("."));
    let workers = cfg.workers_mut().and_then(|w| *w).unwrap_or(1);
    let ctx = RunContext {
        data_root: common
            .data_root
            .clone()
            .unwrap_or_else(|| config_dir.to_path_buf()),
        workers,
    };
    let out_dir = cfg
        .out_dir_mut()
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let hash = cfg.config_hash();
    log::info!("{} config_sha256={hash}", E::NAME);
    let artifacts = exec(&cfg, &ctx)?;
    for path in write_artifacts(&out_dir, &hash, &artifacts)? {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Train(c)
        | Command::TransferDevice(c)
        | Command::TransferSpace(c)
        | Command::Search(c)
        | Command::GenSynthetic(c)
        | Command::Eval(c) => c,
    };
    env_logger::Builder::new()
        .filter_level(common.log_level)
        .init();
    let result = match &cli.command {
        Command::Train(c) => run::<TrainExperiment>(c, cmd_train),
        Command::TransferDevice(c) => run::<TransferDeviceExperiment>(c, cmd_transfer_device),
        Command::TransferSpace(c) => run::<TransferSpaceExperiment>(c, cmd_transfer_space),
        Command::Search(c) => run::<SearchExperiment>(c, cmd_search),
        Command::GenSynthetic(c) => {
            run::<GenSyntheticExperiment>(c, |cfg, _| cmd_gen_synthetic(cfg))
        }
        Command::Eval(c) => run::<EvalExperiment>(c, cmd_eval),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
