use serde::{Deserialize, Serialize};

/// Handover tuning shared by the baseline and predictive modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoPolicy {
    /// Handover hysteresis margin, dB.
    pub hom_db: f64,
    pub check_period_ms: u64,
    pub pingpong_guard_ms: u64,
    /// Number of recursive prediction iterations.
    pub horizon_n: usize,
    pub prediction_step_ms: u64,
}

impl Default for HoPolicy {
    fn default() -> Self {
        Self { hom_db: 3.0, check_period_ms: 1000, pingpong_guard_ms: 2000, horizon_n: 10, prediction_step_ms: 1000 }
    }
}

impl HoPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.hom_db >= 0.0) {
            return Err("policy: hom_db must be >= 0".into());
        }
        if self.horizon_n < 1 {
            return Err("policy: horizon_n must be >= 1".into());
        }
        if self.prediction_step_ms == 0 || self.check_period_ms == 0 {
            return Err("policy: periods must be > 0".into());
        }
        if self.prediction_step_ms > u32::MAX as u64 / self.horizon_n as u64 {
            return Err("policy: horizon_n * prediction_step_ms overflows the TTT field".into());
        }
        Ok(())
    }
}
