//! RIC-side E2 endpoint: association table, subscription routing.

use std::collections::BTreeMap;

use super::agent::{AssociationPhase, AssociationState, Subscription};
use super::message::{ControlStatus, E2Message, HandoverCommand};
use super::E2Error;
use crate::radio::{MeasurementReport, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XAppId(pub u32);

#[derive(Debug, Clone)]
struct Route {
    xapp: XAppId,
    sub: Subscription,
}

#[derive(Debug, Clone)]
struct Association {
    state: AssociationState,
    next_requestor: u32,
    pending: BTreeMap<u32, Route>,
    routes: BTreeMap<u32, Route>,
}

/// What the RIC runtime should do after a message from a node.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispatch {
    /// Reply to send back to `node`.
    ToNode { node: u32, msg: E2Message },
    ToXApp { xapp: XAppId, node: u32, report: MeasurementReport },
    NodeConnected { node: u32 },
    SubscriptionConfirmed { xapp: XAppId, node: u32, subscription_id: u32 },
    SubscriptionRejected { xapp: XAppId, node: u32, subscription_id: u32 },
    ControlAck { node: u32, status: ControlStatus },
}

#[derive(Debug, Default, Clone)]
pub struct E2Termination {
    associations: BTreeMap<u32, Association>,
    delivered: u64,
    dropped: u64,
}

impl E2Termination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn phase(&self, node: u32) -> AssociationPhase {
        self.associations.get(&node).map_or(AssociationPhase::Idle, |a| a.state.phase)
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.associations.iter().filter(|(_, a)| a.state.phase == AssociationPhase::Established).map(|(n, _)| *n)
    }

    pub fn function_id(&self, node: u32, name: &str) -> Option<u16> {
        let a = self.associations.get(&node)?;
        a.state.registered_functions.iter().find(|f| f.name == name).map(|f| f.id)
    }

    pub fn delivered_indications(&self) -> u64 {
        self.delivered
    }

    pub fn dropped_indications(&self) -> u64 {
        self.dropped
    }

    pub fn active_subscriptions(&self, node: u32) -> usize {
        self.associations.get(&node).map_or(0, |a| a.routes.len())
    }

    /// Builds a subscription request on behalf of `xapp`. The request id is
    /// allocated per association and becomes the subscription id.
    pub fn subscribe(&mut self, xapp: XAppId, node: u32, function_id: u16, period_ms: u32) -> Result<E2Message, E2Error> {
        let assoc = self.established_mut(node)?;
        let requestor_id = assoc.next_requestor;
        assoc.next_requestor += 1;
        assoc.pending.insert(requestor_id, Route { xapp, sub: Subscription { function_id, period_ms } });
        Ok(E2Message::RicSubscriptionRequest { requestor_id, ran_function_id: function_id, report_period_ms: period_ms })
    }

    /// Wraps a handover command from an xApp for the owning node.
    pub fn control(&mut self, node: u32, ue: UeId, cmd: HandoverCommand) -> Result<E2Message, E2Error> {
        self.established_mut(node)?;
        Ok(E2Message::RicControlRequest { node_id: node, ue_id: ue.0, control: cmd })
    }

    pub fn teardown(&mut self, node: u32) {
        self.associations.remove(&node);
    }

    pub fn handle(&mut self, node: u32, msg: E2Message) -> Result<Vec<Dispatch>, E2Error> {
        match msg {
            E2Message::E2SetupRequest { node_id, ran_functions } => {
                if node_id != node {
                    return Err(E2Error::Protocol(format!("setup for node {node_id} arrived on link {node}")));
                }
                if self.phase(node) == AssociationPhase::Established {
                    return Err(E2Error::Protocol(format!("node {node} already established")));
                }
                let mut state = AssociationState::new(ran_functions);
                state.phase = AssociationPhase::Established;
                self.associations.insert(
                    node,
                    Association { state, next_requestor: 1, pending: BTreeMap::new(), routes: BTreeMap::new() },
                );
                Ok(vec![
                    Dispatch::ToNode { node, msg: E2Message::E2SetupResponse { node_id: node, accepted: true } },
                    Dispatch::NodeConnected { node },
                ])
            }
            E2Message::RicSubscriptionResponse { subscription_id, accepted } => {
                let assoc = self.established_mut(node)?;
                let route = assoc
                    .pending
                    .remove(&subscription_id)
                    .ok_or_else(|| E2Error::Protocol(format!("response for unknown subscription {subscription_id}")))?;
                let xapp = route.xapp;
                if accepted {
                    assoc.state.active_subscriptions.insert(subscription_id, route.sub.clone());
                    assoc.routes.insert(subscription_id, route);
                    Ok(vec![Dispatch::SubscriptionConfirmed { xapp, node, subscription_id }])
                } else {
                    Ok(vec![Dispatch::SubscriptionRejected { xapp, node, subscription_id }])
                }
            }
            E2Message::RicIndication { subscription_id, report } => {
                let route = self.associations.get(&node).and_then(|a| a.routes.get(&subscription_id));
                match route {
                    Some(r) => {
                        self.delivered += 1;
                        Ok(vec![Dispatch::ToXApp { xapp: r.xapp, node, report }])
                    }
                    None => {
                        self.dropped += 1;
                        Ok(vec![])
                    }
                }
            }
            E2Message::RicControlAck { status } => Ok(vec![Dispatch::ControlAck { node, status }]),
            other => Err(E2Error::Protocol(format!("termination cannot handle {}", other.name()))),
        }
    }

    fn established_mut(&mut self, node: u32) -> Result<&mut Association, E2Error> {
        match self.associations.get_mut(&node) {
            Some(a) if a.state.phase == AssociationPhase::Established => Ok(a),
            _ => Err(E2Error::Protocol(format!("node {node} not established"))),
        }
    }
}
