//! The handover xApps: KPM monitor, HO management and QoS predictor, plus
//! the baseline RAN-side Event A3 rule.

mod apps;
mod decision;
mod forecast;
mod policy;

pub use apps::{
    kpm_on_indication, qp_predict, DecisionLog, DecisionRecord, HoManagement, KpmMonitor, QosPredictor,
    HO_MANAGEMENT, KPM_MONITOR, QOS_PREDICTOR,
};
pub use decision::{
    baseline_ho_check, ho_check, scan_forecast, HoDecision, OutcomeFlag, PredictionOutcome, PredictionRequest,
};
pub use forecast::{ForecastError, ForecastQuery, Forecaster, ModelForecaster, OracleForecaster, ScriptedForecaster};
pub use policy::HoPolicy;
