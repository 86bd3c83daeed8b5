use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::dataset::Dataset;
use super::model::{RecurrentModel, Scaler};
use super::optim::Optimizer;
use super::NnError;
use crate::sim::rng_stream;

/// Share of each series' windows used for training; the rest validates.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochLimit,
    EarlyStopping,
    TargetReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_mse: Vec<f64>,
    pub train_mae: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub val_mae: Vec<f64>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stop: StopReason,
    pub train_windows: usize,
    pub val_windows: usize,
    /// Not serialized, so report files stay reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl TrainReport {
    pub fn best_val_mse(&self) -> f64 {
        self.val_mse[self.best_epoch - 1]
    }

    pub fn best_val_mae(&self) -> f64 {
        self.val_mae[self.best_epoch - 1]
    }
}

/// Windows over normalized series, split chronologically per series.
pub(crate) struct Windows {
    pub norm: Vec<Vec<f64>>,
    /// `(series, start)` pairs; the target follows the window.
    pub train: Vec<(usize, usize)>,
    pub val: Vec<(usize, usize)>,
    pub scaler: Scaler,
}

pub(crate) fn make_windows(dataset: &Dataset, lookback: usize) -> Result<Windows, NnError> {
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut fit = Vec::new();
    for (si, s) in dataset.series.iter().enumerate() {
        let n = s.values.len().saturating_sub(lookback);
        if n == 0 {
            continue;
        }
        let n_train = if n >= 2 { ((n as f64 * TRAIN_FRACTION).floor() as usize).max(1) } else { n };
        train.extend((0..n_train).map(|i| (si, i)));
        val.extend((n_train..n).map(|i| (si, i)));
        fit.extend_from_slice(&s.values[..n_train + lookback]);
    }
    if train.is_empty() || val.is_empty() {
        let longest = dataset.series.iter().map(|s| s.values.len()).max().unwrap_or(0);
        return Err(NnError::DatasetTooSmall { need: lookback + 2, got: longest });
    }
    let scaler = Scaler::fit(&fit)?;
    let norm = dataset.series.iter().map(|s| s.values.iter().map(|v| scaler.normalize(*v)).collect()).collect();
    Ok(Windows { norm, train, val, scaler })
}

impl Windows {
    fn sample(&self, lookback: usize, (s, i): (usize, usize)) -> (&[f64], f64) {
        let v = &self.norm[s];
        (&v[i..i + lookback], v[i + lookback])
    }
}

/// Inference-mode MSE and MAE of `model` over windows.
fn evaluate(model: &RecurrentModel, w: &Windows, idx: &[(usize, usize)]) -> Result<(f64, f64), NnError> {
    let lb = model.config().lookback;
    let (mut se, mut ae) = (0.0, 0.0);
    for &k in idx {
        let (x, t) = w.sample(lb, k);
        let e = model.forward(x)? - t;
        se += e * e;
        ae += e.abs();
    }
    let n = idx.len() as f64;
    Ok((se / n, ae / n))
}

/// Mini-batch training with early stopping on validation MSE. Returns the
/// weights of the best validation epoch.
pub fn train(config: &ModelConfig, dataset: &Dataset) -> Result<(RecurrentModel, TrainReport), NnError> {
    config.validate()?;
    let started = Instant::now();
    let lb = config.lookback;
    let w = make_windows(dataset, lb)?;
    let mut model = RecurrentModel::new(config.clone())?;
    model.set_scaler(w.scaler);

    let mut opt = Optimizer::new(config.optimizer, model.params().len());
    let mut shuffle_rng = rng_stream("nn/shuffle", config.seed);
    let mut dropout_rng = rng_stream("nn/dropout", config.seed);
    let mut order = w.train.clone();

    let mut report = TrainReport {
        train_mse: Vec::new(),
        train_mae: Vec::new(),
        val_mse: Vec::new(),
        val_mae: Vec::new(),
        best_epoch: 0,
        epochs_run: 0,
        stop: StopReason::EpochLimit,
        train_windows: w.train.len(),
        val_windows: w.val.len(),
        wall_time_ms: 0.0,
    };
    let mut best = model.params().to_vec();
    let mut best_mse = f64::INFINITY;
    let mut grads = vec![0.0; model.params().len()];
    let mut batch: Vec<(&[f64], f64)> = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut se, mut ae) = (0.0, 0.0);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&k| w.sample(lb, k)));
            grads.iter_mut().for_each(|g| *g = 0.0);
            let (bse, bae) = model.accumulate_grad(&batch, Some(&mut dropout_rng), &mut grads);
            se += bse;
            ae += bae;
            opt.step(model.params_mut(), &grads, config.learning_rate);
        }
        let n = order.len() as f64;
        report.train_mse.push(se / n);
        report.train_mae.push(ae / n);
        let (vmse, vmae) = evaluate(&model, &w, &w.val)?;
        report.val_mse.push(vmse);
        report.val_mae.push(vmae);
        report.epochs_run = epoch;
        if !vmse.is_finite() {
            break;
        }
        if vmse < best_mse || report.best_epoch == 0 {
            best_mse = vmse;
            report.best_epoch = epoch;
            best.copy_from_slice(model.params());
        }
        if config.target_val_mae.is_some_and(|target| vmae < target) {
            report.stop = StopReason::TargetReached;
            break;
        }
        if epoch - report.best_epoch >= config.patience {
            report.stop = StopReason::EarlyStopping;
            break;
        }
    }
    if report.best_epoch == 0 {
        return Err(NnError::InvalidConfig("training ran zero epochs".into()));
    }
    model.params_mut().copy_from_slice(&best);
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok((model, report))
}
