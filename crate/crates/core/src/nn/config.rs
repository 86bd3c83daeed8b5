use serde::{Deserialize, Serialize};

use super::cells::CellKind;
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Rmsprop,
}

fn default_patience() -> usize {
    20
}

/// Architecture plus training hyperparameters.
///
/// `units` lists the recurrent layers bottom to top. When `dropout > 0` a
/// dropout layer follows every recurrent layer. A single-unit dense head
/// reads the last hidden state of the top layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub arch: CellKind,
    pub units: Vec<usize>,
    #[serde(default)]
    pub dropout: f64,
    pub lookback: usize,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    /// Stop as soon as validation MAE (normalized) falls below this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_val_mae: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelConfig {
    /// Two stacked LSTM layers (64, 32) with dropout 0.2, RMSProp.
    pub fn lstm() -> Self {
        Self {
            arch: CellKind::Lstm,
            units: vec![64, 32],
            dropout: 0.2,
            lookback: 15,
            activation: Activation::Relu,
            optimizer: OptimizerKind::Rmsprop,
            learning_rate: 1e-4,
            batch_size: 16,
            epochs: 200,
            patience: 20,
            target_val_mae: None,
            seed: 0,
        }
    }

    /// One GRU layer of 128 units, no dropout, Adam.
    pub fn gru() -> Self {
        Self {
            arch: CellKind::Gru,
            units: vec![128],
            dropout: 0.0,
            optimizer: OptimizerKind::Adam,
            ..Self::lstm()
        }
    }

    pub fn preset(arch: CellKind) -> Self {
        match arch {
            CellKind::Gru => Self::gru(),
            CellKind::Lstm => Self::lstm(),
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidConfig(m.to_string()));
        if self.lookback == 0 {
            return bad("lookback must be at least 1");
        }
        if self.units.is_empty() || self.units.contains(&0) {
            return bad("every recurrent layer needs at least one unit");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout rate must lie in [0, 1)");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        Ok(())
    }
}
