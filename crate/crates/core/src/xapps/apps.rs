use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use serde::Serialize;

use crate::e2::{HandoverCommand, XAppId, KPM_FUNCTION_NAME};
use crate::radio::{CellId, MeasurementReport, UeId};
use crate::ric::{SdlStore, XApp, XAppContext, XAppDescriptor, XAppMsg};
use crate::sim::SimTime;

use super::decision::{ho_check, scan_forecast, HoDecision, OutcomeFlag, PredictionOutcome, PredictionRequest};
use super::forecast::{ForecastQuery, Forecaster};
use super::HoPolicy;

pub const KPM_MONITOR: &str = "kpm-mon";
pub const HO_MANAGEMENT: &str = "ho-mgmt";
pub const QOS_PREDICTOR: &str = "qp";

/// One row of the decision log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub t_ms: u64,
    pub ue_id: u32,
    pub mode: String,
    pub serving: u32,
    pub target: u32,
    pub ttt_ms: Option<u64>,
    pub k_inv: Option<u32>,
    pub k_a3: Option<u32>,
}

pub type DecisionLog = Rc<RefCell<Vec<DecisionRecord>>>;

/// Stores one report: one SDL sample per cell plus the latest-report slot.
/// Returns the number of samples rejected for non-monotone time.
pub fn kpm_on_indication(sdl: &mut SdlStore, report: &MeasurementReport) -> usize {
    let mut dropped = 0;
    for e in &report.entries {
        if sdl.put(report.ue, e.cell, report.t, e.rsrp_dbm).is_err() {
            dropped += 1;
        }
    }
    let newer = sdl.latest(report.ue).is_none_or(|r| r.t < report.t);
    if newer {
        sdl.set_latest(report.clone());
    }
    dropped
}

#[derive(Debug, Default)]
pub struct KpmMonitor {
    pub stored: u64,
    pub dropped: u64,
}

impl KpmMonitor {
    pub fn descriptor(period_ms: u32) -> XAppDescriptor {
        XAppDescriptor::new(KPM_MONITOR).subscribe(KPM_FUNCTION_NAME, period_ms)
    }
}

impl XApp for KpmMonitor {
    fn on_indication(&mut self, ctx: &mut XAppContext<'_>, report: &MeasurementReport) {
        let dropped = kpm_on_indication(ctx.sdl, report);
        self.dropped += dropped as u64;
        self.stored += (report.entries.len() - dropped) as u64;
    }
}

/// N-step signal prediction on request from HO Management.
pub struct QosPredictor {
    policy: HoPolicy,
    forecaster: Box<dyn Forecaster>,
}

impl QosPredictor {
    pub fn new(policy: HoPolicy, forecaster: Box<dyn Forecaster>) -> Self {
        Self { policy, forecaster }
    }

    pub fn descriptor() -> XAppDescriptor {
        XAppDescriptor::new(QOS_PREDICTOR)
    }
}

/// Forecasts serving and target RSRP `horizon_n` steps ahead from SDL
/// history and scans for inversion and Event A3.
pub fn qp_predict(
    req: &PredictionRequest,
    policy: &HoPolicy,
    forecaster: &dyn Forecaster,
    sdl: &SdlStore,
    now: SimTime,
) -> PredictionOutcome {
    let lookback = forecaster.lookback();
    let serv_hist: Vec<f64> = sdl.window(req.ue, req.serving, lookback).into_iter().map(|(_, r)| r).collect();
    let tgt_hist: Vec<f64> = sdl.window(req.ue, req.target, lookback).into_iter().map(|(_, r)| r).collect();
    if serv_hist.len() < lookback || tgt_hist.len() < lookback {
        return PredictionOutcome::flagged(OutcomeFlag::InsufficientHistory);
    }
    let query = |cell: CellId, history: &[f64]| {
        forecaster.forecast(&ForecastQuery {
            ue: req.ue,
            cell,
            now,
            history,
            horizon: policy.horizon_n,
            step_ms: policy.prediction_step_ms,
        })
    };
    let (serv, tgt) = match (query(req.serving, &serv_hist), query(req.target, &tgt_hist)) {
        (Ok(s), Ok(t)) if s.len() == policy.horizon_n && t.len() == policy.horizon_n => (s, t),
        _ => return PredictionOutcome::flagged(OutcomeFlag::ModelError),
    };
    scan_forecast(&serv, &tgt, policy.hom_db, policy.prediction_step_ms, req.target)
}

impl XApp for QosPredictor {
    fn on_message(&mut self, ctx: &mut XAppContext<'_>, _from: XAppId, msg: XAppMsg) {
        if let XAppMsg::PredictionRequest(req) = msg {
            let outcome = qp_predict(&req, &self.policy, self.forecaster.as_ref(), ctx.sdl, ctx.now);
            ctx.send(HO_MANAGEMENT, XAppMsg::PredictionOutcome(req, outcome));
        }
    }
}

/// Periodic handover need assessment and RIC Control issuance.
pub struct HoManagement {
    policy: HoPolicy,
    mode: String,
    /// Scheduled execution time of the last commanded handover per UE.
    last_ho: BTreeMap<UeId, SimTime>,
    in_flight: BTreeMap<UeId, PredictionRequest>,
    log: DecisionLog,
}

impl HoManagement {
    pub fn new(policy: HoPolicy, mode: &str, log: DecisionLog) -> Self {
        Self {
            policy,
            mode: mode.to_owned(),
            last_ho: BTreeMap::new(),
            in_flight: BTreeMap::new(),
            log,
        }
    }

    pub fn descriptor(policy: &HoPolicy) -> XAppDescriptor {
        XAppDescriptor::new(HO_MANAGEMENT).timer(policy.check_period_ms)
    }
}

impl XApp for HoManagement {
    fn on_timer(&mut self, ctx: &mut XAppContext<'_>) {
        let ues: Vec<UeId> = ctx.sdl.ues().collect();
        for ue in ues {
            if self.in_flight.contains_key(&ue) {
                continue;
            }
            let report = ctx.sdl.latest(ue).expect("listed ue has a report");
            if let Some(req) = ho_check(report, &self.policy, self.last_ho.get(&ue).copied(), ctx.now) {
                self.in_flight.insert(ue, req);
                ctx.send(QOS_PREDICTOR, XAppMsg::PredictionRequest(req));
            }
        }
    }

    fn on_message(&mut self, ctx: &mut XAppContext<'_>, _from: XAppId, msg: XAppMsg) {
        let XAppMsg::PredictionOutcome(req, outcome) = msg else { return };
        self.in_flight.remove(&req.ue);
        let ttt = match outcome.decision {
            HoDecision::Handover { target, ttt_ms } => {
                self.last_ho.insert(req.ue, ctx.now + ttt_ms);
                let cmd = HandoverCommand { target_cell: target, ttt_ms: ttt_ms as u32 };
                // one cell per gNodeB: node id == cell id
                ctx.control(req.serving.0, req.ue, cmd);
                Some(ttt_ms)
            }
            HoDecision::NoHandover => None,
        };
        self.log.borrow_mut().push(DecisionRecord {
            t_ms: ctx.now.as_ms(),
            ue_id: req.ue.0,
            mode: self.mode.clone(),
            serving: req.serving.0,
            target: req.target.0,
            ttt_ms: ttt,
            k_inv: outcome.inversion_step,
            k_a3: outcome.a3_step,
        });
    }
}
