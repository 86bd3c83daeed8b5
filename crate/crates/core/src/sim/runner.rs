//! The co-simulation loop: mobility and radio, E2 nodes, the RIC with its
//! xApps, and application traffic, all driven by one event queue.

use std::cell::RefCell;
use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::path::Path;
use std::rc::Rc;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::scenario::{default_route, HoMode, Scenario, TrafficApp};
use super::{rng_stream, EventQueue, SimError, SimRng, SimTime};
use crate::e2::{
    self, standard_functions, ControlStatus, E2Agent, E2Error, HandoverCommand, RanControlHandler, XAppId,
};
use crate::nn::{CellKind, RecurrentModel};
use crate::radio::{
    advance_to, load_mobility_trace, CellId, RadioEnv, RadioError, Route, UeId, VehicleState,
};
use crate::ric::{Ric, RicError, SdlStore};
use crate::traffic::{
    apply_handover_interruption, serve_queue, stream_receiver, AppKind, Delivery, FrameSource, LinkQueue,
    MetricsCollector, OtaReceiver, OtaSender, Packet, RunMetrics, StreamConfig,
};
use crate::xapps::{
    baseline_ho_check, DecisionLog, DecisionRecord, Forecaster, HoManagement, KpmMonitor, ModelForecaster,
    OracleForecaster, QosPredictor,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("model: {0}")]
    Model(String),
    #[error(transparent)]
    E2(#[from] E2Error),
    #[error(transparent)]
    Ric(#[from] RicError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: HoMode,
    pub model: Option<Arc<RecurrentModel>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandoverRecord {
    pub t_ms: u64,
    pub ue_id: u32,
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunCounters {
    pub events_scheduled: u64,
    pub events_dispatched: u64,
    pub events_cancelled: u64,
    pub events_pending: u64,
    pub reports: u64,
    pub e2_messages: u64,
    pub indications_sent: u64,
    pub indications_delivered: u64,
    pub indications_dropped: u64,
    pub subscriptions_confirmed: u64,
    pub subscriptions_rejected: u64,
    pub controls_sent: u64,
    pub control_acks_ok: u64,
    pub control_acks_failed: u64,
    pub undeliverable_xapp_messages: u64,
    pub xapp_timer_calls: u64,
    pub handovers: u64,
    pub stale_handovers: u64,
    pub packets_enqueued: u64,
    pub packets_delivered: u64,
    pub packets_queued_at_end: u64,
    pub packets_in_flight_at_end: u64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub mode: HoMode,
    pub metrics: RunMetrics,
    pub decisions: Vec<DecisionRecord>,
    pub handovers: Vec<HandoverRecord>,
    pub counters: RunCounters,
    pub sdl: SdlStore,
}

#[derive(Debug, Clone)]
enum Ev {
    Tick,
    KpmReport,
    XAppTimer(XAppId),
    StreamFrame(usize),
    OtaPacket(usize),
    LinkTick,
    HoExecute { ue: UeId, from: CellId, to: CellId },
}

struct Ue {
    state: VehicleState,
    cqi: u8,
    ul: LinkQueue,
    dl: LinkQueue,
    last_ho: Option<SimTime>,
    frame_arrivals: Vec<f64>,
}

#[allow(clippy::large_enum_variant)]
enum App {
    Stream { ue: UeId, cfg: StreamConfig, src: FrameSource, rng: SimRng, seq: u64 },
    Ota { ue: UeId, tx: OtaSender, rx: OtaReceiver },
}

enum Dir {
    ToRic,
    ToRan,
}

/// Collects handover commands accepted by one node during a pump.
struct HoHandler<'a> {
    node: u32,
    ues: &'a BTreeMap<UeId, Ue>,
    cells: &'a [CellId],
    accepted: Vec<(UeId, CellId, HandoverCommand)>,
}

impl RanControlHandler for HoHandler<'_> {
    fn on_handover(&mut self, ue: UeId, cmd: &HandoverCommand) -> ControlStatus {
        let from = CellId(self.node);
        let ok = self.ues.get(&ue).is_some_and(|u| u.state.serving == from)
            && self.cells.contains(&cmd.target_cell)
            && cmd.target_cell != from;
        if ok {
            self.accepted.push((ue, from, *cmd));
            ControlStatus::Success
        } else {
            ControlStatus::Failure
        }
    }
}

struct Runner {
    mode: HoMode,
    seed: u64,
    end: SimTime,
    scenario: Scenario,
    env: Arc<RadioEnv>,
    cells: Vec<CellId>,
    ues: BTreeMap<UeId, Ue>,
    apps: Vec<App>,
    agents: BTreeMap<u32, E2Agent>,
    ric: Ric,
    queue: EventQueue<Ev>,
    metrics: MetricsCollector,
    log: DecisionLog,
    handovers: Vec<HandoverRecord>,
    counters: RunCounters,
}

fn build_vehicles(s: &Scenario) -> Result<Vec<VehicleState>, RunError> {
    let placeholder = CellId(0);
    if let Some(path) = &s.mobility_trace {
        let traces = load_mobility_trace(path)?;
        if traces.is_empty() {
            return Err(RunError::Config(format!("{}: trace has no vehicles", path.display())));
        }
        return Ok(traces.into_iter().map(|(ue, t)| VehicleState::on_trace(ue, Arc::new(t), placeholder)).collect());
    }
    let mut out = Vec::new();
    for v in &s.vehicles {
        let points = if v.route.is_empty() { default_route() } else { v.route.clone() };
        let route = Arc::new(Route::new(points)?);
        let mut speed = v.speed_mps;
        if v.speed_jitter_mps > 0.0 {
            let mut rng = rng_stream(&format!("mobility/ue{}", v.id.0), s.seed);
            speed += rng.random_range(-v.speed_jitter_mps..=v.speed_jitter_mps);
        }
        out.push(VehicleState::on_route(v.id, route, speed, placeholder));
    }
    Ok(out)
}

fn check_model(mode: HoMode, model: Option<&Arc<RecurrentModel>>) -> Result<(), RunError> {
    let want = match mode {
        HoMode::Lstm => CellKind::Lstm,
        HoMode::Gru => CellKind::Gru,
        _ => return Ok(()),
    };
    let m = model.ok_or_else(|| RunError::Model(format!("mode {mode} needs a trained model")))?;
    if m.config().arch != want {
        return Err(RunError::Model(format!("mode {mode} given a {:?} model", m.config().arch)));
    }
    Ok(())
}

impl Runner {
    fn new(scenario: &Scenario, opts: &RunOptions) -> Result<Self, RunError> {
        scenario.validate().map_err(RunError::Config)?;
        check_model(opts.mode, opts.model.as_ref())?;
        let seed = scenario.seed;

        let mut env = RadioEnv::new(scenario.cells.clone(), scenario.radio.clone())?;
        let mut vehicles = build_vehicles(scenario)?;
        for v in &vehicles {
            env.add_ue(v.id, v.max_travel(), seed);
        }
        for v in &mut vehicles {
            v.serving = env.best_cell(v);
        }
        let env = Arc::new(env);
        let cells: Vec<CellId> = env.cells().iter().map(|c| c.id).collect();

        let mut per_ue_kind = BTreeMap::new();
        let mut apps = Vec::new();
        for app in &scenario.traffic {
            let ue = app.ue();
            if !vehicles.iter().any(|v| v.id == ue) {
                return Err(RunError::Config(format!("traffic app for unknown ue {ue}")));
            }
            let kind = matches!(app, TrafficApp::Ota { .. });
            if per_ue_kind.insert((ue, kind), ()).is_some() {
                return Err(RunError::Config(format!("ue {ue} has two apps of the same kind")));
            }
            apps.push(match app {
                TrafficApp::Stream { ue, config } => App::Stream {
                    ue: *ue,
                    cfg: config.clone(),
                    src: FrameSource::new(config),
                    rng: rng_stream(&format!("traffic/stream/ue{}", ue.0), seed),
                    seq: 0,
                },
                TrafficApp::Ota { ue, config } => {
                    App::Ota { ue: *ue, tx: OtaSender::new(config.clone()), rx: OtaReceiver::new(config) }
                }
            });
        }

        let log: DecisionLog = Rc::new(RefCell::new(Vec::new()));
        let mut ric = Ric::new(SdlStore::new(scenario.ric.sdl_capacity));
        ric.register_xapp(KpmMonitor::descriptor(scenario.radio.report_period_ms as u32), Box::<KpmMonitor>::default())?;
        if opts.mode.is_predictive() {
            let forecaster: Box<dyn Forecaster> = match opts.mode {
                HoMode::Oracle => Box::new(OracleForecaster::new(
                    env.clone(),
                    vehicles.clone(),
                    scenario.radio.channel_update_ms,
                )),
                _ => Box::new(ModelForecaster::new(opts.model.clone().expect("checked"))),
            };
            ric.register_xapp(QosPredictor::descriptor(), Box::new(QosPredictor::new(scenario.policy.clone(), forecaster)))?;
            ric.register_xapp(
                HoManagement::descriptor(&scenario.policy),
                Box::new(HoManagement::new(scenario.policy.clone(), opts.mode.as_str(), log.clone())),
            )?;
        }

        let metrics = MetricsCollector::new(vehicles.iter().map(|v| v.id));
        let ues = vehicles
            .into_iter()
            .map(|state| {
                let ue = Ue {
                    state,
                    cqi: 0,
                    ul: LinkQueue::default(),
                    dl: LinkQueue::default(),
                    last_ho: None,
                    frame_arrivals: Vec::new(),
                };
                (ue.state.id, ue)
            })
            .collect();
        let agents = cells.iter().map(|c| (c.0, E2Agent::new(c.0, standard_functions()))).collect();

        Ok(Self {
            mode: opts.mode,
            seed,
            end: scenario.duration(),
            scenario: scenario.clone(),
            env,
            cells,
            ues,
            apps,
            agents,
            ric,
            queue: EventQueue::new(),
            metrics,
            log,
            handovers: Vec::new(),
            counters: RunCounters::default(),
        })
    }

    fn schedule(&mut self, due: SimTime, ev: Ev) -> Result<(), RunError> {
        if due < self.end {
            self.queue.schedule(due, ev)?;
        }
        Ok(())
    }

    /// Delivers E2 messages until both sides go quiet. Every message is
    /// encoded and decoded on its way.
    fn pump(&mut self, mut pending: VecDeque<(Dir, u32, Vec<u8>)>) -> Result<(), RunError> {
        let now = self.queue.now();
        let mut accepted = Vec::new();
        while let Some((dir, node, bytes)) = pending.pop_front() {
            self.counters.e2_messages += 1;
            let msg = e2::decode(&bytes).map_err(E2Error::from)?;
            match dir {
                Dir::ToRic => {
                    self.ric.on_e2(node, msg, now)?;
                }
                Dir::ToRan => {
                    let agent = self
                        .agents
                        .get_mut(&node)
                        .ok_or_else(|| E2Error::Protocol(format!("message for unknown node {node}")))?;
                    let mut handler = HoHandler { node, ues: &self.ues, cells: &self.cells, accepted: Vec::new() };
                    let replies = agent.handle(msg, &mut handler)?;
                    accepted.append(&mut handler.accepted);
                    for r in replies {
                        pending.push_back((Dir::ToRic, node, e2::encode(&r).map_err(E2Error::from)?));
                    }
                }
            }
            for (n, m) in self.ric.take_outbound() {
                pending.push_back((Dir::ToRan, n, e2::encode(&m).map_err(E2Error::from)?));
            }
        }
        for (ue, from, cmd) in accepted {
            self.queue.schedule(now + cmd.ttt_ms as u64, Ev::HoExecute { ue, from, to: cmd.target_cell })?;
        }
        Ok(())
    }

    fn setup_e2(&mut self) -> Result<(), RunError> {
        let mut pending = VecDeque::new();
        for (node, agent) in &mut self.agents {
            pending.push_back((Dir::ToRic, *node, e2::encode(&agent.setup_request()).map_err(E2Error::from)?));
        }
        self.pump(pending)
    }

    fn run(mut self) -> Result<RunOutput, RunError> {
        self.setup_e2()?;
        self.schedule(SimTime::ZERO, Ev::Tick)?;
        for i in 0..self.apps.len() {
            let (due, ev) = match &self.apps[i] {
                App::Stream { cfg, .. } => (SimTime::from_ms(cfg.start_ms), Ev::StreamFrame(i)),
                App::Ota { tx, .. } => match tx.next_due() {
                    Some(t) => (t, Ev::OtaPacket(i)),
                    None => continue,
                },
            };
            self.schedule(due, ev)?;
        }
        self.schedule(SimTime::ZERO, Ev::LinkTick)?;

        while self.queue.peek_due().is_some_and(|t| t < self.end) {
            let ev = self.queue.pop().expect("peeked");
            let now = ev.due;
            match ev.kind {
                Ev::Tick => self.on_tick(now)?,
                Ev::KpmReport => self.on_report(now)?,
                Ev::XAppTimer(id) => {
                    self.counters.xapp_timer_calls += 1;
                    self.ric.fire_timer(id, now)?;
                    let out: VecDeque<_> = self
                        .ric
                        .take_outbound()
                        .into_iter()
                        .map(|(n, m)| e2::encode(&m).map(|b| (Dir::ToRan, n, b)))
                        .collect::<Result<_, _>>()
                        .map_err(E2Error::from)?;
                    self.pump(out)?;
                }
                Ev::StreamFrame(i) => self.on_stream_frame(i, now)?,
                Ev::OtaPacket(i) => self.on_ota_packet(i, now)?,
                Ev::LinkTick => self.on_link_tick(now)?,
                Ev::HoExecute { ue, from, to } => self.on_handover(ue, from, to, now),
            }
        }
        Ok(self.finish())
    }

    fn on_tick(&mut self, now: SimTime) -> Result<(), RunError> {
        let grid = self.scenario.radio.channel_update_ms;
        for ue in self.ues.values_mut() {
            ue.state = advance_to(&ue.state, now, grid);
            let report = self.env.measure(&ue.state, now);
            ue.cqi = report.cqi;
            self.metrics.record_cqi(now, ue.state.id, report.cqi);
        }
        if now.as_ms().is_multiple_of(self.scenario.radio.report_period_ms) {
            self.schedule(now, Ev::KpmReport)?;
        }
        for (id, period) in self.ric.timers() {
            if now.as_ms().is_multiple_of(period) {
                self.schedule(now, Ev::XAppTimer(id))?;
            }
        }
        self.schedule(now + grid, Ev::Tick)
    }

    fn on_report(&mut self, now: SimTime) -> Result<(), RunError> {
        let ids: Vec<UeId> = self.ues.keys().copied().collect();
        for id in ids {
            let report = self.env.measure(&self.ues[&id].state, now);
            self.counters.reports += 1;
            let node = report.serving.0;
            let agent = self.agents.get_mut(&node).expect("serving cell has an agent");
            let mut out = VecDeque::new();
            for msg in agent.indications(&report) {
                self.counters.indications_sent += 1;
                out.push_back((Dir::ToRic, node, e2::encode(&msg).map_err(E2Error::from)?));
            }
            self.pump(out)?;
            if self.mode == HoMode::Default {
                let p = &self.scenario.policy;
                let ue = &self.ues[&id];
                if let Some(target) = baseline_ho_check(&report, p.hom_db, ue.last_ho, p.pingpong_guard_ms, now) {
                    self.log.borrow_mut().push(DecisionRecord {
                        t_ms: now.as_ms(),
                        ue_id: id.0,
                        mode: HoMode::Default.as_str().into(),
                        serving: report.serving.0,
                        target: target.0,
                        ttt_ms: Some(0),
                        k_inv: None,
                        k_a3: None,
                    });
                    self.queue.schedule(now, Ev::HoExecute { ue: id, from: report.serving, to: target })?;
                }
            }
        }
        Ok(())
    }

    fn on_stream_frame(&mut self, i: usize, now: SimTime) -> Result<(), RunError> {
        let App::Stream { ue, cfg, src, rng, seq } = &mut self.apps[i] else { unreachable!() };
        let bytes = src.next_size(rng);
        let packet = Packet::new(AppKind::Stream, *seq, bytes, now);
        *seq += 1;
        let period = cfg.frame_period_ms;
        self.ues.get_mut(ue).expect("validated").ul.push(packet);
        self.schedule(now + period, Ev::StreamFrame(i))
    }

    fn on_ota_packet(&mut self, i: usize, now: SimTime) -> Result<(), RunError> {
        let App::Ota { ue, tx, .. } = &mut self.apps[i] else { unreachable!() };
        let q = &mut self.ues.get_mut(ue).expect("validated").dl;
        while let Some(p) = tx.emit(now) {
            q.push(p);
        }
        if let Some(next) = tx.next_due() {
            self.schedule(next, Ev::OtaPacket(i))?;
        }
        Ok(())
    }

    fn on_link_tick(&mut self, now: SimTime) -> Result<(), RunError> {
        let link = &self.scenario.link;
        let mut delivered: Vec<(UeId, Delivery)> = Vec::new();
        for (id, ue) in &mut self.ues {
            for q in [&mut ue.ul, &mut ue.dl] {
                if !q.is_empty() {
                    delivered.extend(serve_queue(link, ue.cqi, q, now, 1).into_iter().map(|d| (*id, d)));
                }
            }
        }
        for (id, d) in delivered {
            if d.delivered_at > self.end {
                self.counters.packets_in_flight_at_end += 1;
                continue;
            }
            self.counters.packets_delivered += 1;
            self.metrics.record_delivery(id, &d);
            match d.app {
                AppKind::Stream => {
                    self.ues.get_mut(&id).expect("known ue").frame_arrivals.push(d.delivered_at.as_ms() as f64)
                }
                AppKind::Ota => {
                    for app in &mut self.apps {
                        if let App::Ota { ue, rx, .. } = app {
                            if *ue == id {
                                rx.receive(&d);
                                if let Some(c) = rx.completion_ms().filter(|_| rx.completed_at == Some(d.delivered_at)) {
                                    self.metrics.record_ota_completion(d.delivered_at, id, c);
                                }
                            }
                        }
                    }
                }
            }
        }
        self.schedule(now + 1, Ev::LinkTick)
    }

    fn on_handover(&mut self, id: UeId, from: CellId, to: CellId, now: SimTime) {
        let interruption = self.scenario.link.interruption_ms;
        let ue = self.ues.get_mut(&id).expect("known ue");
        if ue.state.serving != from {
            self.counters.stale_handovers += 1;
            return;
        }
        ue.state.serving = to;
        ue.last_ho = Some(now);
        apply_handover_interruption(&mut ue.ul, now, interruption);
        apply_handover_interruption(&mut ue.dl, now, interruption);
        self.counters.handovers += 1;
        self.handovers.push(HandoverRecord { t_ms: now.as_ms(), ue_id: id.0, from: from.0, to: to.0 });
    }

    fn finish(mut self) -> RunOutput {
        for app in &self.apps {
            if let App::Stream { ue, cfg, .. } = app {
                let arrivals = &self.ues[ue].frame_arrivals;
                let freezes = stream_receiver(arrivals, cfg.frame_period_ms, cfg.prebuffer_frames);
                self.metrics.record_freezes(*ue, &freezes);
            }
        }
        let c = &mut self.counters;
        c.events_scheduled = self.queue.scheduled_total();
        c.events_dispatched = self.queue.dispatched();
        c.events_cancelled = self.queue.cancelled();
        c.events_pending = self.queue.pending() as u64;
        let term = self.ric.termination();
        c.indications_delivered = term.delivered_indications();
        c.indications_dropped = term.dropped_indications();
        let rc = self.ric.counters();
        c.subscriptions_confirmed = rc.subscriptions_confirmed;
        c.subscriptions_rejected = rc.subscriptions_rejected;
        c.controls_sent = rc.controls_sent;
        c.control_acks_ok = rc.control_acks_ok;
        c.control_acks_failed = rc.control_acks_failed;
        c.undeliverable_xapp_messages = rc.undeliverable_messages;
        for ue in self.ues.values() {
            c.packets_enqueued += ue.ul.enqueued + ue.dl.enqueued;
            c.packets_queued_at_end += (ue.ul.len() + ue.dl.len()) as u64;
        }
        let metrics = self.metrics.finalize(self.mode.as_str(), self.seed, self.end);
        let decisions = self.log.borrow().clone();
        let sdl = std::mem::take(self.ric.sdl_mut());
        RunOutput { mode: self.mode, metrics, decisions, handovers: self.handovers, counters: self.counters, sdl }
    }
}

/// Runs one scenario to completion.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, RunError> {
    Runner::new(scenario, opts)?.run()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl RunOutput {
    pub fn decisions_csv(&self) -> String {
        let mut s = String::from("t_ms,ue_id,mode,serving,target,ttt_ms,k_inv,k_a3\n");
        for d in &self.decisions {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                d.t_ms,
                d.ue_id,
                d.mode,
                d.serving,
                d.target,
                opt(d.ttt_ms),
                opt(d.k_inv),
                opt(d.k_a3)
            ));
        }
        s
    }

    pub fn handovers_csv(&self) -> String {
        let mut s = String::from("t_ms,ue_id,from,to\n");
        for h in &self.handovers {
            s.push_str(&format!("{},{},{},{}\n", h.t_ms, h.ue_id, h.from, h.to));
        }
        s
    }

    pub fn metrics_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.metrics.write_csv(&mut buf).expect("writing to memory");
        buf
    }

    /// Writes `metrics.csv`, `decisions.csv`, `handovers.csv` and finally
    /// `aggregates.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("metrics.csv"), self.metrics_csv())?;
        std::fs::write(dir.join("decisions.csv"), self.decisions_csv())?;
        std::fs::write(dir.join("handovers.csv"), self.handovers_csv())?;
        let tmp = dir.join("aggregates.json.tmp");
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(self.metrics.aggregates_json().as_bytes())?;
        f.sync_all()?;
        std::fs::rename(tmp, dir.join("aggregates.json"))
    }
}
