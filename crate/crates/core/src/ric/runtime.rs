use std::collections::{BTreeMap, VecDeque};

use crate::e2::{Dispatch, E2Message, E2Termination, HandoverCommand, XAppId};
use crate::radio::{MeasurementReport, UeId};
use crate::sim::SimTime;
use crate::xapps::{PredictionOutcome, PredictionRequest};

use super::sdl::SdlStore;
use super::RicError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XAppDescriptor {
    pub name: String,
    /// `(ran function name, report period ms)` pairs.
    pub wanted_subscriptions: Vec<(String, u32)>,
    pub timer_period_ms: Option<u64>,
}

impl XAppDescriptor {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_owned(), wanted_subscriptions: vec![], timer_period_ms: None }
    }

    pub fn subscribe(mut self, function: &str, period_ms: u32) -> Self {
        self.wanted_subscriptions.push((function.to_owned(), period_ms));
        self
    }

    pub fn timer(mut self, period_ms: u64) -> Self {
        self.timer_period_ms = Some(period_ms);
        self
    }
}

/// Messages exchanged between xApps through the RIC.
#[derive(Debug, Clone, PartialEq)]
pub enum XAppMsg {
    PredictionRequest(PredictionRequest),
    PredictionOutcome(PredictionRequest, PredictionOutcome),
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Control { node: u32, ue: UeId, cmd: HandoverCommand },
    Send { to: String, msg: XAppMsg },
}

/// Handle given to an xApp during a callback.
pub struct XAppContext<'a> {
    pub now: SimTime,
    pub sdl: &'a mut SdlStore,
    me: XAppId,
    actions: Vec<Action>,
}

impl<'a> XAppContext<'a> {
    pub fn id(&self) -> XAppId {
        self.me
    }

    /// Issues a RIC Control handover request towards `node`.
    pub fn control(&mut self, node: u32, ue: UeId, cmd: HandoverCommand) {
        self.actions.push(Action::Control { node, ue, cmd });
    }

    /// Queues a message for the xApp registered as `to`; delivered after
    /// the current callback returns.
    pub fn send(&mut self, to: &str, msg: XAppMsg) {
        self.actions.push(Action::Send { to: to.to_owned(), msg });
    }
}

pub trait XApp {
    fn on_indication(&mut self, _ctx: &mut XAppContext<'_>, _report: &MeasurementReport) {}
    fn on_timer(&mut self, _ctx: &mut XAppContext<'_>) {}
    fn on_message(&mut self, _ctx: &mut XAppContext<'_>, _from: XAppId, _msg: XAppMsg) {}
}

struct Slot {
    desc: XAppDescriptor,
    handler: Option<Box<dyn XApp>>,
    indications: u64,
    timer_calls: u64,
}

enum Delivery {
    Indication(MeasurementReport),
    Timer,
    Message(XAppId, XAppMsg),
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RicCounters {
    pub subscriptions_requested: u64,
    pub subscriptions_confirmed: u64,
    pub subscriptions_rejected: u64,
    pub controls_sent: u64,
    pub control_acks_ok: u64,
    pub control_acks_failed: u64,
    pub undeliverable_messages: u64,
}

/// The near-RT RIC: E2 termination, xApp host and SDL.
pub struct Ric {
    term: E2Termination,
    slots: BTreeMap<XAppId, Slot>,
    next_id: u32,
    sdl: SdlStore,
    outbound: Vec<(u32, E2Message)>,
    counters: RicCounters,
}

impl Ric {
    pub fn new(sdl: SdlStore) -> Self {
        Self {
            term: E2Termination::new(),
            slots: BTreeMap::new(),
            next_id: 0,
            sdl,
            outbound: Vec::new(),
            counters: RicCounters::default(),
        }
    }

    pub fn register_xapp(&mut self, desc: XAppDescriptor, handler: Box<dyn XApp>) -> Result<XAppId, RicError> {
        if self.slots.values().any(|s| s.desc.name == desc.name) {
            return Err(RicError::DuplicateXApp(desc.name));
        }
        let id = XAppId(self.next_id);
        self.next_id += 1;
        let nodes: Vec<u32> = self.term.nodes().collect();
        self.slots.insert(id, Slot { desc, handler: Some(handler), indications: 0, timer_calls: 0 });
        for node in nodes {
            self.subscribe_node(id, node)?;
        }
        Ok(id)
    }

    /// Removes an xApp; its timers become no-ops.
    pub fn deregister_xapp(&mut self, id: XAppId) -> bool {
        self.slots.remove(&id).is_some()
    }

    pub fn xapp_id(&self, name: &str) -> Option<XAppId> {
        self.slots.iter().find(|(_, s)| s.desc.name == name).map(|(id, _)| *id)
    }

    pub fn timers(&self) -> Vec<(XAppId, u64)> {
        self.slots.iter().filter_map(|(id, s)| s.desc.timer_period_ms.map(|p| (*id, p))).collect()
    }

    pub fn indications_delivered(&self, id: XAppId) -> u64 {
        self.slots.get(&id).map_or(0, |s| s.indications)
    }

    pub fn timer_calls(&self, id: XAppId) -> u64 {
        self.slots.get(&id).map_or(0, |s| s.timer_calls)
    }

    pub fn termination(&self) -> &E2Termination {
        &self.term
    }

    pub fn counters(&self) -> &RicCounters {
        &self.counters
    }

    pub fn sdl(&self) -> &SdlStore {
        &self.sdl
    }

    pub fn sdl_mut(&mut self) -> &mut SdlStore {
        &mut self.sdl
    }

    /// E2 messages waiting to be sent to nodes.
    pub fn take_outbound(&mut self) -> Vec<(u32, E2Message)> {
        std::mem::take(&mut self.outbound)
    }

    /// Processes a message received from `node`.
    pub fn on_e2(&mut self, node: u32, msg: E2Message, now: SimTime) -> Result<(), RicError> {
        let dispatches = self.term.handle(node, msg)?;
        let mut work = VecDeque::new();
        for d in dispatches {
            match d {
                Dispatch::ToNode { node, msg } => self.outbound.push((node, msg)),
                Dispatch::NodeConnected { node } => {
                    let ids: Vec<XAppId> = self.slots.keys().copied().collect();
                    for id in ids {
                        self.subscribe_node(id, node)?;
                    }
                }
                Dispatch::ToXApp { xapp, report, .. } => work.push_back((xapp, Delivery::Indication(report))),
                Dispatch::SubscriptionConfirmed { .. } => self.counters.subscriptions_confirmed += 1,
                Dispatch::SubscriptionRejected { .. } => self.counters.subscriptions_rejected += 1,
                Dispatch::ControlAck { status, .. } => match status {
                    crate::e2::ControlStatus::Success => self.counters.control_acks_ok += 1,
                    crate::e2::ControlStatus::Failure => self.counters.control_acks_failed += 1,
                },
            }
        }
        self.run(work, now)
    }

    pub fn fire_timer(&mut self, id: XAppId, now: SimTime) -> Result<(), RicError> {
        if !self.slots.contains_key(&id) {
            return Ok(());
        }
        self.run(VecDeque::from([(id, Delivery::Timer)]), now)
    }

    fn subscribe_node(&mut self, id: XAppId, node: u32) -> Result<(), RicError> {
        let wanted = self.slots[&id].desc.wanted_subscriptions.clone();
        for (function, period) in wanted {
            if let Some(fid) = self.term.function_id(node, &function) {
                let msg = self.term.subscribe(id, node, fid, period)?;
                self.counters.subscriptions_requested += 1;
                self.outbound.push((node, msg));
            }
        }
        Ok(())
    }

    fn run(&mut self, mut work: VecDeque<(XAppId, Delivery)>, now: SimTime) -> Result<(), RicError> {
        while let Some((id, delivery)) = work.pop_front() {
            let Some(slot) = self.slots.get_mut(&id) else {
                self.counters.undeliverable_messages += 1;
                continue;
            };
            let mut handler = slot.handler.take().ok_or(RicError::Reentrant(id))?;
            let mut ctx = XAppContext { now, sdl: &mut self.sdl, me: id, actions: Vec::new() };
            match delivery {
                Delivery::Indication(report) => {
                    slot.indications += 1;
                    handler.on_indication(&mut ctx, &report);
                }
                Delivery::Timer => {
                    slot.timer_calls += 1;
                    handler.on_timer(&mut ctx);
                }
                Delivery::Message(from, msg) => handler.on_message(&mut ctx, from, msg),
            }
            let actions = ctx.actions;
            slot.handler = Some(handler);
            for action in actions {
                match action {
                    Action::Control { node, ue, cmd } => {
                        let msg = self.term.control(node, ue, cmd)?;
                        self.counters.controls_sent += 1;
                        self.outbound.push((node, msg));
                    }
                    Action::Send { to, msg } => match self.xapp_id(&to) {
                        Some(target) => work.push_back((target, Delivery::Message(id, msg))),
                        None => self.counters.undeliverable_messages += 1,
                    },
                }
            }
        }
        Ok(())
    }
}
