use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::{Activation, ModelConfig, OptimizerKind};
use super::dataset::Dataset;
use super::train::train;
use super::NnError;
use crate::sim::rng_stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpace {
    pub lookback: Vec<usize>,
    pub optimizer: Vec<OptimizerKind>,
    pub activation: Vec<Activation>,
    pub batch_size: Vec<usize>,
    pub learning_rate: Vec<f64>,
}

impl Default for GridSpace {
    fn default() -> Self {
        Self {
            lookback: vec![10, 15],
            optimizer: vec![OptimizerKind::Rmsprop, OptimizerKind::Adam],
            activation: vec![Activation::Relu, Activation::Linear],
            batch_size: vec![16, 32, 64],
            learning_rate: vec![1e-4, 5e-4, 1e-3, 5e-3],
        }
    }
}

impl GridSpace {
    pub fn len(&self) -> usize {
        self.lookback.len()
            * self.optimizer.len()
            * self.activation.len()
            * self.batch_size.len()
            * self.learning_rate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every combination applied to `base`, in nested order
    /// lookback > optimizer > activation > batch > learning rate.
    pub fn configs(&self, base: &ModelConfig) -> Vec<ModelConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &lookback in &self.lookback {
            for &optimizer in &self.optimizer {
                for &activation in &self.activation {
                    for &batch_size in &self.batch_size {
                        for &learning_rate in &self.learning_rate {
                            out.push(ModelConfig {
                                lookback,
                                optimizer,
                                activation,
                                batch_size,
                                learning_rate,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rank: usize,
    /// Position of the config in the full enumeration.
    pub index: usize,
    pub config: ModelConfig,
    pub val_mse: f64,
    pub val_mae: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Indices of the configs to evaluate: all of them, or a seeded subset of
/// `budget` in ascending order.
pub fn select(space_len: usize, budget: Option<usize>, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..space_len).collect();
    if let Some(b) = budget.filter(|b| *b < space_len) {
        idx.shuffle(&mut rng_stream("nn/grid", seed));
        idx.truncate(b);
        idx.sort_unstable();
    }
    idx
}

/// Trains every selected config with the base seed and ranks them by
/// validation MSE, then MAE. Jobs run on up to `threads` workers; the result
/// does not depend on the thread count.
pub fn grid_search(
    space: &GridSpace,
    base: &ModelConfig,
    dataset: &Dataset,
    budget: Option<usize>,
    threads: usize,
) -> Result<Vec<GridResult>, NnError> {
    if space.is_empty() {
        return Err(NnError::InvalidConfig("empty search space".into()));
    }
    let all = space.configs(base);
    let chosen = select(all.len(), budget, base.seed);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<GridResult, NnError>>>> = Mutex::new(vec![None; chosen.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, chosen.len().max(1)) {
            s.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&index) = chosen.get(j) else { break };
                let config = all[index].clone();
                let res = train(&config, dataset).map(|(_, r)| GridResult {
                    rank: 0,
                    index,
                    val_mse: r.best_val_mse(),
                    val_mae: r.best_val_mae(),
                    best_epoch: r.best_epoch,
                    epochs_run: r.epochs_run,
                    config,
                });
                slots.lock().expect("grid worker panicked")[j] = Some(res);
            });
        }
    });
    let mut results = slots
        .into_inner()
        .expect("grid worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by(|a, b| {
        a.val_mse.total_cmp(&b.val_mse).then(a.val_mae.total_cmp(&b.val_mae)).then(a.index.cmp(&b.index))
    });
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(results)
}
