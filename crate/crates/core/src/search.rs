//! Predictor-guided iterative search: each round retrains a fresh predictor
//! on every architecture measured so far, ranks the unmeasured pool by
//! prediction and measures the top batch.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::BenchmarkDataset;
use crate::encoding::{ArchitectureRecord, EncodingMode};
use crate::predictor::{predict, train_on_samples, TargetKind, TrainConfig};
use crate::rng::{derive_seed, seeded};
use crate::{Error, Result};

pub const DEFAULT_BATCH: usize = 10;

/// Predictions for the candidates plus the final training loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit {
    pub predictions: Vec<f64>,
    pub train_loss: Option<f64>,
}

/// Anything that can be fitted on measured architectures and rank the rest.
pub trait Surrogate {
    /// `pool` is every architecture of the search space (measured or not);
    /// features that are free to compute may be normalized over it.
    fn fit_predict(
        &mut self,
        train: &[(&ArchitectureRecord, f64)],
        candidates: &[&ArchitectureRecord],
        pool: &[&ArchitectureRecord],
        seed: u64,
    ) -> Result<SurrogateFit>;
}

/// MLP predictor retrained from scratch each round.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSurrogate {
    pub mode: EncodingMode,
    pub config: TrainConfig,
    pub vec_len: Option<usize>,
}

impl Surrogate for MlpSurrogate {
    fn fit_predict(
        &mut self,
        train: &[(&ArchitectureRecord, f64)],
        candidates: &[&ArchitectureRecord],
        pool: &[&ArchitectureRecord],
        seed: u64,
    ) -> Result<SurrogateFit> {
        let records: Vec<&ArchitectureRecord> = train.iter().map(|(r, _)| *r).collect();
        let targets: Vec<f64> = train.iter().map(|(_, t)| *t).collect();
        let config = self.config.clone().with_seed(seed);
        let model = train_on_samples(
            &records,
            &targets,
            TargetKind::Accuracy,
            &self.mode,
            self.vec_len,
            &config,
            Some(pool),
        )?;
        Ok(SurrogateFit {
            predictions: predict(&model, candidates, None)?,
            train_loss: model.final_loss(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub samples_used: usize,
    pub best_target: f64,
    /// `None` for the random bootstrap round.
    pub train_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchState {
    pub pool: Vec<String>,
    /// Measured architectures in the order they were sampled.
    pub sampled: Vec<(String, f64)>,
    pub round: usize,
    pub best_so_far: Option<(String, f64)>,
    pub history: Vec<RoundRecord>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Sampled(usize),
    /// Every pool member has been measured.
    Exhausted,
}

impl SearchState {
    /// A search over every architecture in `dataset` that has an accuracy.
    pub fn new(dataset: &BenchmarkDataset, seed: u64) -> Self {
        Self {
            pool: dataset
                .records()
                .iter()
                .filter(|r| r.accuracy.is_some())
                .map(|r| r.arch_id.clone())
                .collect(),
            sampled: Vec::new(),
            round: 0,
            best_so_far: None,
            history: Vec::new(),
            seed,
        }
    }

    pub fn remaining(&self) -> usize {
        self.pool.len() - self.sampled.len()
    }

    /// Number of measurements taken when the first architecture with target
    /// at least `threshold` was sampled.
    pub fn samples_to_reach(&self, threshold: f64) -> Option<usize> {
        self.sampled
            .iter()
            .position(|(_, t)| *t >= threshold)
            .map(|i| i + 1)
    }
}

/// One round: bootstrap uniformly at random when nothing is measured yet,
/// otherwise retrain `surrogate` on all measurements and take the
/// `batch` best-predicted unmeasured architectures (ties by arch id).
pub fn search_step<S: Surrogate + ?Sized>(
    state: &mut SearchState,
    surrogate: &mut S,
    dataset: &BenchmarkDataset,
    batch: usize,
) -> Result<StepOutcome> {
    if batch == 0 {
        return Err(Error::Argument("batch must be >= 1".into()));
    }
    let measured: BTreeSet<&str> = state.sampled.iter().map(|(id, _)| id.as_str()).collect();
    let mut remaining: Vec<&ArchitectureRecord> = state
        .pool
        .iter()
        .filter(|id| !measured.contains(id.as_str()))
        .map(|id| dataset.require(id))
        .collect::<Result<_>>()?;
    if remaining.is_empty() {
        return Ok(StepOutcome::Exhausted);
    }
    let take = batch.min(remaining.len());
    let round_seed = derive_seed(state.seed, state.round as u64);
    let (chosen, train_loss): (Vec<&ArchitectureRecord>, Option<f64>) = if state.sampled.is_empty()
    {
        remaining.shuffle(&mut seeded(round_seed));
        (remaining[..take].to_vec(), None)
    } else {
        let train: Vec<(&ArchitectureRecord, f64)> = state
            .sampled
            .iter()
            .map(|(id, t)| dataset.require(id).map(|r| (r, *t)))
            .collect::<Result<_>>()?;
        let pool: Vec<&ArchitectureRecord> = state
            .pool
            .iter()
            .map(|id| dataset.require(id))
            .collect::<Result<_>>()?;
        let fit = surrogate.fit_predict(&train, &remaining, &pool, round_seed)?;
        if fit.predictions.len() != remaining.len() {
            return Err(Error::Shape {
                context: "surrogate predictions",
                expected: remaining.len(),
                found: fit.predictions.len(),
            });
        }
        let mut order: Vec<usize> = (0..remaining.len()).collect();
        order.sort_by(|&a, &b| {
            fit.predictions[b]
                .total_cmp(&fit.predictions[a])
                .then_with(|| remaining[a].arch_id.cmp(&remaining[b].arch_id))
        });
        (
            order[..take].iter().map(|&i| remaining[i]).collect(),
            fit.train_loss,
        )
    };
    for r in chosen {
        let target = r.accuracy.ok_or_else(|| Error::Ingestion {
            arch_id: r.arch_id.clone(),
            feature: "accuracy".into(),
        })?;
        if state
            .best_so_far
            .as_ref()
            .map_or(true, |(_, b)| target > *b)
        {
            state.best_so_far = Some((r.arch_id.clone(), target));
        }
        state.sampled.push((r.arch_id.clone(), target));
    }
    state.round += 1;
    state.history.push(RoundRecord {
        round: state.round,
        samples_used: state.sampled.len(),
        best_target: state.best_so_far.as_ref().map_or(f64::NAN, |(_, b)| *b),
        train_loss,
    });
    Ok(StepOutcome::Sampled(take))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: EncodingMode,
    pub budget: usize,
    pub batch: usize,
    pub predictor: TrainConfig,
}

impl SearchConfig {
    pub fn new(mode: EncodingMode, budget: usize) -> Self {
        Self {
            mode,
            budget,
            batch: DEFAULT_BATCH,
            predictor: TrainConfig::pretrain(),
        }
    }
}

/// Repeats [`search_step`] with a generic surrogate until `budget`
/// measurements are spent or the pool is exhausted.
pub fn run_search_with<S: Surrogate + ?Sized>(
    dataset: &BenchmarkDataset,
    surrogate: &mut S,
    budget: usize,
    batch: usize,
    seed: u64,
) -> Result<SearchState> {
    if batch == 0 || budget < batch {
        return Err(Error::Argument(format!(
            "budget {budget} must be at least the batch size {batch}"
        )));
    }
    let mut state = SearchState::new(dataset, seed);
    while state.sampled.len() < budget {
        let take = batch.min(budget - state.sampled.len());
        if search_step(&mut state, surrogate, dataset, take)? == StepOutcome::Exhausted {
            break;
        }
    }
    Ok(state)
}

/// Predictor-guided search with an MLP over `config.mode`.
pub fn run_search(
    dataset: &BenchmarkDataset,
    config: &SearchConfig,
    seed: u64,
) -> Result<SearchState> {
    let mut surrogate = MlpSurrogate {
        mode: config.mode.clone(),
        config: config.predictor.clone(),
        vec_len: dataset.vec_len(),
    };
    run_search_with(dataset, &mut surrogate, config.budget, config.batch, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_synthetic, SyntheticSpec};

    struct Oracle;

    impl Surrogate for Oracle {
        fn fit_predict(
            &mut self,
            _train: &[(&ArchitectureRecord, f64)],
            candidates: &[&ArchitectureRecord],
            _pool: &[&ArchitectureRecord],
            _seed: u64,
        ) -> Result<SurrogateFit> {
            Ok(SurrogateFit {
                predictions: candidates.iter().map(|r| r.accuracy.unwrap()).collect(),
                train_loss: None,
            })
        }
    }

    fn space(n: usize) -> BenchmarkDataset {
        generate_synthetic(&SyntheticSpec::random("s", n, 0, 6, 4, 11)).unwrap()
    }

    #[test]
    fn oracle_surrogate_takes_true_top_batch() {
        let d = space(300);
        let mut state = SearchState::new(&d, 0);
        search_step(&mut state, &mut Oracle, &d, 10).unwrap();
        let boot: BTreeSet<String> = state.sampled.iter().map(|(id, _)| id.clone()).collect();
        search_step(&mut state, &mut Oracle, &d, 10).unwrap();
        let mut rest: Vec<(f64, &str)> = d
            .records()
            .iter()
            .filter(|r| !boot.contains(&r.arch_id))
            .map(|r| (r.accuracy.unwrap(), r.arch_id.as_str()))
            .collect();
        rest.sort_by(|a, b| b.0.total_cmp(&a.0));
        let want: BTreeSet<&str> = rest[..10].iter().map(|(_, id)| *id).collect();
        let got: BTreeSet<&str> = state.sampled[10..]
            .iter()
            .map(|(id, _)| id.as_str())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn budget_accounting_and_trace_invariants() {
        let d = space(200);
        let st = run_search_with(&d, &mut Oracle, 40, 10, 3).unwrap();
        assert_eq!(st.round, 4);
        assert_eq!(st.sampled.len(), 40);
        let unique: BTreeSet<&str> = st.sampled.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(unique.len(), 40);
        assert!(st
            .history
            .windows(2)
            .all(|w| w[1].best_target >= w[0].best_target));
        let partial = run_search_with(&d, &mut Oracle, 25, 10, 3).unwrap();
        assert_eq!(partial.sampled.len(), 25);
        assert_eq!(
            partial
                .history
                .iter()
                .map(|h| h.samples_used)
                .collect::<Vec<_>>(),
            [10, 20, 25]
        );
    }

    #[test]
    fn pool_exhaustion_stops_early() {
        let d = space(15);
        let st = run_search_with(&d, &mut Oracle, 40, 10, 0).unwrap();
        assert_eq!(st.sampled.len(), 15);
        assert_eq!(st.remaining(), 0);
    }

    #[test]
    fn mlp_search_is_reproducible() {
        let d = space(150);
        let mode = EncodingMode::zcp(d.proxies()).unwrap();
        let mut cfg = SearchConfig::new(mode, 30);
        cfg.predictor = TrainConfig {
            hidden_width: 8,
            epochs: 5,
            ..TrainConfig::pretrain()
        };
        let a = run_search(&d, &cfg, 4).unwrap();
        let b = run_search(&d, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.history[1].train_loss.is_some());
    }

    #[test]
    fn rejects_budget_below_batch() {
        let d = space(20);
        assert!(run_search_with(&d, &mut Oracle, 5, 10, 0).is_err());
    }
}
