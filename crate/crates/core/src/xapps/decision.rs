use serde::{Deserialize, Serialize};

use crate::radio::{CellId, MeasurementReport, UeId};
use crate::sim::SimTime;

use super::HoPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRequest {
    pub ue: UeId,
    pub serving: CellId,
    pub target: CellId,
    pub issued_at: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HoDecision {
    Handover { target: CellId, ttt_ms: u64 },
    NoHandover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeFlag {
    InsufficientHistory,
    ModelError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionOutcome {
    pub decision: HoDecision,
    /// 1-based step of the first predicted `tgt > serv`.
    pub inversion_step: Option<u32>,
    /// 1-based step of the first predicted `tgt - hom > serv`.
    pub a3_step: Option<u32>,
    pub flag: Option<OutcomeFlag>,
}

impl PredictionOutcome {
    pub fn flagged(flag: OutcomeFlag) -> Self {
        Self { decision: HoDecision::NoHandover, inversion_step: None, a3_step: None, flag: Some(flag) }
    }
}

/// Walks paired forecasts until Event A3 fires or the horizon ends.
///
/// The handover, if any, is timed at the first inversion step.
pub fn scan_forecast(serving: &[f64], target: &[f64], hom_db: f64, step_ms: u64, target_cell: CellId) -> PredictionOutcome {
    let mut inversion = None;
    let mut a3 = None;
    for (k, (s, t)) in serving.iter().zip(target).enumerate() {
        let step = k as u32 + 1;
        if inversion.is_none() && t > s {
            inversion = Some(step);
        }
        if t - hom_db > *s {
            a3 = Some(step);
            break;
        }
    }
    let decision = match a3 {
        Some(_) => {
            let k_inv = inversion.expect("A3 implies inversion when hom >= 0");
            HoDecision::Handover { target: target_cell, ttt_ms: k_inv as u64 * step_ms }
        }
        None => HoDecision::NoHandover,
    };
    PredictionOutcome { decision, inversion_step: inversion, a3_step: a3, flag: None }
}

fn guard_open(last_ho: Option<SimTime>, now: SimTime, guard_ms: u64) -> bool {
    last_ho.is_none_or(|last| now >= last + guard_ms)
}

/// HO Management trigger: the strongest neighbour within HOM of the
/// serving cell earns a prediction request.
pub fn ho_check(
    report: &MeasurementReport,
    policy: &HoPolicy,
    last_ho: Option<SimTime>,
    now: SimTime,
) -> Option<PredictionRequest> {
    if !guard_open(last_ho, now, policy.pingpong_guard_ms) {
        return None;
    }
    let serv = report.rsrp_of(report.serving)?;
    let best = report.best_neighbor()?;
    (best.rsrp_dbm + policy.hom_db > serv).then_some(PredictionRequest {
        ue: report.ue,
        serving: report.serving,
        target: best.cell,
        issued_at: now,
    })
}

/// RAN-side Event A3 check with immediate execution.
pub fn baseline_ho_check(
    report: &MeasurementReport,
    hom_db: f64,
    last_ho: Option<SimTime>,
    guard_ms: u64,
    now: SimTime,
) -> Option<CellId> {
    if !guard_open(last_ho, now, guard_ms) {
        return None;
    }
    let serv = report.rsrp_of(report.serving)?;
    let best = report.best_neighbor()?;
    (best.rsrp_dbm - hom_db > serv).then_some(best.cell)
}
