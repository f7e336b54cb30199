//! Predictor kernels for sample-efficient neural architecture search.
//!
//! Architectures are described by search-space-agnostic feature vectors
//! (zero-cost-proxy scores, latencies on reference devices) or by their
//! topology vector. A small MLP regressor maps these encodings, optionally
//! concatenated with a hardware-device representation, to accuracy or
//! latency. Pretrained predictors adapt to new devices and new search spaces
//! from a handful of measured samples, and drive a predictor-guided search
//! loop.
//!
//! The crate is `no_std` (with `alloc`). File formats, the experiment
//! harness and the command line live in the `archpred` crate.
//!
//! # Layout
//!
//! - [`tensor`], [`mlp`], [`optim`], [`schedule`], [`loss`]: dense numeric kernel
//!   with manual backpropagation, AdamW and cosine annealing.
//! - [`encoding`]: architecture records and the Vec/ZCP/HWL feature encodings.
//! - [`embedding`]: hardware device representations (sample, index, table).
//! - [`predictor`]: scratch training, device and search-space fine-tuning.
//! - [`metrics`]: Spearman rank correlation, correlation matrices, device splits.
//! - [`dataset`], [`synthetic`]: benchmark containers, splits and a latent-factor
//!   generator for correlated synthetic benchmarks.
//! - [`search`]: predictor-guided iterative architecture search.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub use error::{Error, Result};

pub mod dataset;
pub mod embedding;
pub mod encoding;
pub mod loss;
pub mod metrics;
pub mod mlp;
pub mod optim;
pub mod predictor;
pub mod rng;
pub mod schedule;
pub mod search;
pub mod synthetic;
pub mod tensor;

pub use dataset::{make_split, BenchmarkDataset, Split, SplitSize};
pub use embedding::{
    index_embedding, init_new_device, sample_embedding, DeviceEncoder, DeviceRepr, DonorChoice,
    EmbeddingTable,
};
pub use encoding::{
    encode, encoding_dim, fit_normalizer, ArchitectureRecord, EncodingKind, EncodingMode,
    FeatureRange, MissingPolicy, Normalizer, SpaceSchema,
};
pub use loss::mse_loss;
pub use metrics::{
    build_adversarial_split, closest_train_device, correlation_matrix, spearman_rho, ColumnKind,
    CorrelationMatrix, DeviceSplit,
};
pub use mlp::{Gradients, Layer, MlpParams};
pub use optim::{adamw_step, AdamWConfig, OptimizerState, ParamGroup};
pub use predictor::{
    finetune_device, finetune_space, predict, pretrain_devices, train_scratch, PredictionTask,
    PredictorModel, SpaceTransferOptions, TargetKind, TrainConfig,
};
pub use schedule::{cosine_lr, LrSchedule};
pub use search::{run_search, search_step, SearchConfig, SearchState};
pub use synthetic::{generate_synthetic, SyntheticSpec};
pub use tensor::DenseMatrix;
