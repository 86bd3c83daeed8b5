use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::nn::RecurrentModel;
use crate::radio::{advance_to, CellId, RadioEnv, UeId, VehicleState};
use crate::sim::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("unknown ue {0}")]
    UnknownUe(UeId),
    #[error("model: {0}")]
    Model(String),
}

pub struct ForecastQuery<'a> {
    pub ue: UeId,
    pub cell: CellId,
    pub now: SimTime,
    /// Most recent samples, oldest first.
    pub history: &'a [f64],
    pub horizon: usize,
    pub step_ms: u64,
}

/// Source of N-step RSRP forecasts for the QoS Predictor.
pub trait Forecaster {
    /// Samples of history required per series.
    fn lookback(&self) -> usize;
    fn forecast(&self, query: &ForecastQuery<'_>) -> Result<Vec<f64>, ForecastError>;
}

/// Reads the simulator's own future: mobility is deterministic and the
/// shadowing fields are fixed per run, so future reports are known exactly.
pub struct OracleForecaster {
    env: Arc<RadioEnv>,
    initial: BTreeMap<UeId, VehicleState>,
    grid_ms: u64,
}

impl OracleForecaster {
    pub fn new(env: Arc<RadioEnv>, initial: impl IntoIterator<Item = VehicleState>, grid_ms: u64) -> Self {
        Self { env, initial: initial.into_iter().map(|v| (v.id, v)).collect(), grid_ms }
    }
}

impl Forecaster for OracleForecaster {
    fn lookback(&self) -> usize {
        1
    }

    fn forecast(&self, q: &ForecastQuery<'_>) -> Result<Vec<f64>, ForecastError> {
        let start = self.initial.get(&q.ue).ok_or(ForecastError::UnknownUe(q.ue))?;
        let mut state = advance_to(start, q.now, self.grid_ms);
        let mut out = Vec::with_capacity(q.horizon);
        for k in 1..=q.horizon as u64 {
            state = advance_to(&state, q.now + k * q.step_ms, self.grid_ms);
            let r = self.env.rsrp(&state, q.cell).ok_or(ForecastError::Model(format!("unknown cell {}", q.cell)))?;
            out.push(r);
        }
        Ok(out)
    }
}

/// Replays a fixed script per (UE, cell): forecast step k is `script[now/step + k]`.
pub struct ScriptedForecaster {
    pub scripts: BTreeMap<(UeId, CellId), Vec<f64>>,
}

impl Forecaster for ScriptedForecaster {
    fn lookback(&self) -> usize {
        1
    }

    fn forecast(&self, q: &ForecastQuery<'_>) -> Result<Vec<f64>, ForecastError> {
        let script = self.scripts.get(&(q.ue, q.cell)).ok_or(ForecastError::UnknownUe(q.ue))?;
        let base = (q.now.as_ms() / q.step_ms) as usize;
        (1..=q.horizon)
            .map(|k| script.get(base + k).copied().ok_or(ForecastError::Model("script exhausted".into())))
            .collect()
    }
}

/// Recursive one-step forecasts from a trained recurrent model.
pub struct ModelForecaster {
    model: Arc<RecurrentModel>,
}

impl ModelForecaster {
    pub fn new(model: Arc<RecurrentModel>) -> Self {
        Self { model }
    }
}

impl Forecaster for ModelForecaster {
    fn lookback(&self) -> usize {
        self.model.config().lookback
    }

    fn forecast(&self, q: &ForecastQuery<'_>) -> Result<Vec<f64>, ForecastError> {
        self.model.predict_recursive(q.history, q.horizon).map_err(|e| ForecastError::Model(e.to_string()))
    }
}
