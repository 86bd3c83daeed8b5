//! One-way ANOVA and per-mode comparison tables.

pub mod anova;
pub mod special;
pub mod summary;

use thiserror::Error;

pub use anova::{anova, f_survival, AnovaResult, GroupSamples};
pub use special::{ln_gamma, reg_inc_beta};
pub use summary::{mean_ci95, summarize, ModeSummary, PairComparison, Summary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incomplete beta continued fraction did not converge")]
    NoConvergence,
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("missing mode: {0}")]
    MissingMode(String),
}
