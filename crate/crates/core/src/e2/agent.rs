//! RAN-side E2 endpoint.

use std::collections::BTreeMap;

use super::message::{ControlStatus, E2Message, HandoverCommand, RanFunction, HO_FUNCTION_NAME, KPM_FUNCTION_NAME};
use super::E2Error;
use crate::radio::{MeasurementReport, UeId};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociationPhase {
    Idle,
    SetupSent,
    Established,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subscription {
    pub function_id: u16,
    pub period_ms: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationState {
    pub phase: AssociationPhase,
    pub registered_functions: Vec<RanFunction>,
    pub active_subscriptions: BTreeMap<u32, Subscription>,
}

impl AssociationState {
    pub fn new(functions: Vec<RanFunction>) -> Self {
        Self { phase: AssociationPhase::Idle, registered_functions: functions, active_subscriptions: BTreeMap::new() }
    }

    fn function_named(&self, name: &str) -> Option<&RanFunction> {
        self.registered_functions.iter().find(|f| f.name == name)
    }
}

/// Callback into the RAN for control actions received over E2.
pub trait RanControlHandler {
    fn on_handover(&mut self, ue: UeId, cmd: &HandoverCommand) -> ControlStatus;
}

/// The E2 agent of one gNodeB.
#[derive(Debug, Clone)]
pub struct E2Agent {
    node_id: u32,
    state: AssociationState,
    /// Last indication time per (subscription, UE).
    last_sent: BTreeMap<(u32, UeId), SimTime>,
}

impl E2Agent {
    pub fn new(node_id: u32, functions: Vec<RanFunction>) -> Self {
        Self { node_id, state: AssociationState::new(functions), last_sent: BTreeMap::new() }
    }

    pub fn node_id(&self) -> u32 {
        self.node_id
    }

    pub fn state(&self) -> &AssociationState {
        &self.state
    }

    pub fn setup_request(&mut self) -> E2Message {
        self.state.phase = AssociationPhase::SetupSent;
        E2Message::E2SetupRequest { node_id: self.node_id, ran_functions: self.state.registered_functions.clone() }
    }

    pub fn teardown(&mut self) {
        self.state.phase = AssociationPhase::Idle;
        self.state.active_subscriptions.clear();
        self.last_sent.clear();
    }

    /// Handles one message from the RIC, returning the replies to send back.
    pub fn handle(
        &mut self,
        msg: E2Message,
        ran: &mut dyn RanControlHandler,
    ) -> Result<Vec<E2Message>, E2Error> {
        match msg {
            E2Message::E2SetupResponse { node_id, accepted } => {
                if node_id != self.node_id || self.state.phase != AssociationPhase::SetupSent {
                    return Err(E2Error::Protocol(format!("unexpected setup response for node {node_id}")));
                }
                self.state.phase = if accepted { AssociationPhase::Established } else { AssociationPhase::Idle };
                Ok(vec![])
            }
            E2Message::RicSubscriptionRequest { requestor_id, ran_function_id, report_period_ms } => {
                self.require_established("subscription")?;
                let known = self.state.registered_functions.iter().any(|f| f.id == ran_function_id);
                let fresh = !self.state.active_subscriptions.contains_key(&requestor_id);
                let accepted = known && fresh && report_period_ms > 0;
                if accepted {
                    self.state
                        .active_subscriptions
                        .insert(requestor_id, Subscription { function_id: ran_function_id, period_ms: report_period_ms });
                }
                Ok(vec![E2Message::RicSubscriptionResponse { subscription_id: requestor_id, accepted }])
            }
            E2Message::RicControlRequest { node_id, ue_id, control } => {
                self.require_established("control")?;
                if node_id != self.node_id || self.state.function_named(HO_FUNCTION_NAME).is_none() {
                    return Ok(vec![E2Message::RicControlAck { status: ControlStatus::Failure }]);
                }
                let status = ran.on_handover(UeId(ue_id), &control);
                Ok(vec![E2Message::RicControlAck { status }])
            }
            other => Err(E2Error::Protocol(format!("agent cannot handle {}", other.name()))),
        }
    }

    /// Indications for every KPM subscription whose period has elapsed.
    pub fn indications(&mut self, report: &MeasurementReport) -> Vec<E2Message> {
        if self.state.phase != AssociationPhase::Established {
            return vec![];
        }
        let Some(kpm) = self.state.function_named(KPM_FUNCTION_NAME).map(|f| f.id) else {
            return vec![];
        };
        let mut out = Vec::new();
        for (&sub_id, sub) in &self.state.active_subscriptions {
            if sub.function_id != kpm {
                continue;
            }
            let key = (sub_id, report.ue);
            let due = match self.last_sent.get(&key) {
                Some(&last) => report.t.saturating_sub(last).as_ms() >= sub.period_ms as u64,
                None => true,
            };
            if due {
                self.last_sent.insert(key, report.t);
                out.push(E2Message::RicIndication { subscription_id: sub_id, report: report.clone() });
            }
        }
        out
    }

    fn require_established(&self, what: &str) -> Result<(), E2Error> {
        if self.state.phase == AssociationPhase::Established {
            Ok(())
        } else {
            Err(E2Error::Protocol(format!("{what} before E2 setup completed")))
        }
    }
}
