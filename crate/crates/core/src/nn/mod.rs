//! Recurrent forecasting models (GRU, LSTM) trained with backpropagation
//! through time.

pub mod cells;
pub mod config;
pub mod dataset;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod persist;
pub mod train;

use thiserror::Error;

pub use cells::{gru_cell, lstm_cell, CellKind, CellParams};
pub use config::{Activation, ModelConfig, OptimizerKind};
pub use dataset::Dataset;
pub use grid::{grid_search, GridResult, GridSpace};
pub use model::{RecurrentModel, Scaler};
pub use train::{train, TrainReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("insufficient history: need {need} samples, got {got}")]
    InsufficientHistory { need: usize, got: usize },
    #[error("dataset too small: need at least {need} samples in a series, got {got}")]
    DatasetTooSmall { need: usize, got: usize },
    #[error("dataset: {0}")]
    Data(String),
    #[error("model file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}
