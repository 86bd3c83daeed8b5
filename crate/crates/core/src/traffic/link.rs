//! Fluid CQI-driven link with FIFO packet service.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::sim::SimTime;

/// Spectral efficiency (bit/s/Hz) per CQI, 256QAM table.
pub const CQI_EFFICIENCY: [f64; 16] = [
    0.0, 0.1523, 0.3770, 0.8770, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547, 6.2266,
    6.9141, 7.4063,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkModel {
    pub cqi_efficiency: [f64; 16],
    pub bandwidth_share_hz: f64,
    pub interruption_ms: u64,
    pub propagation_ms: u64,
}

impl Default for LinkModel {
    fn default() -> Self {
        Self { cqi_efficiency: CQI_EFFICIENCY, bandwidth_share_hz: 5e6, interruption_ms: 50, propagation_ms: 1 }
    }
}

impl LinkModel {
    pub fn validate(&self) -> Result<(), String> {
        if self.cqi_efficiency[0] != 0.0 {
            return Err("link: efficiency of CQI 0 must be 0".into());
        }
        if self.cqi_efficiency.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err("link: efficiency must be non-decreasing in CQI".into());
        }
        if !(self.bandwidth_share_hz > 0.0) {
            return Err("link: bandwidth share must be positive".into());
        }
        Ok(())
    }

    /// Bits the link can carry in `dt_ms` at `cqi`.
    pub fn capacity_bits(&self, cqi: u8, dt_ms: u64) -> f64 {
        self.cqi_efficiency[cqi.min(15) as usize] * self.bandwidth_share_hz * dt_ms as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppKind {
    Stream,
    Ota,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub app: AppKind,
    pub seq: u64,
    pub bytes: u32,
    pub enqueued: SimTime,
    remaining_bits: f64,
}

impl Packet {
    pub fn new(app: AppKind, seq: u64, bytes: u32, enqueued: SimTime) -> Self {
        Self { app, seq, bytes, enqueued, remaining_bits: bytes as f64 * 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub app: AppKind,
    pub seq: u64,
    pub bytes: u32,
    pub delivered_at: SimTime,
    pub delay_ms: f64,
}

/// FIFO queue of one UE in one direction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkQueue {
    packets: VecDeque<Packet>,
    outage_until: Option<SimTime>,
    pub enqueued: u64,
    pub delivered: u64,
    pub interruptions: u64,
}

impl LinkQueue {
    pub fn push(&mut self, p: Packet) {
        self.enqueued += 1;
        self.packets.push_back(p);
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn queued_bits(&self) -> f64 {
        self.packets.iter().map(|p| p.remaining_bits).sum()
    }

    pub fn in_outage(&self, now: SimTime) -> bool {
        self.outage_until.is_some_and(|u| now < u)
    }
}

/// Blocks the link for `[now, now + interruption_ms)`. Queued packets are
/// kept and served after the outage.
pub fn apply_handover_interruption(queue: &mut LinkQueue, now: SimTime, interruption_ms: u64) {
    let until = now + interruption_ms;
    queue.outage_until = Some(queue.outage_until.map_or(until, |u| u.max(until)));
    queue.interruptions += 1;
}

/// Drains up to one tick of capacity from the head of the queue. Packets
/// finished in the tick are delivered at its end plus propagation delay.
pub fn serve_queue(link: &LinkModel, cqi: u8, queue: &mut LinkQueue, now: SimTime, dt_ms: u64) -> Vec<Delivery> {
    let mut out = Vec::new();
    if queue.in_outage(now) {
        return out;
    }
    let mut budget = link.capacity_bits(cqi, dt_ms);
    let arrive = now + dt_ms + link.propagation_ms;
    while budget > 0.0 {
        let Some(head) = queue.packets.front_mut() else { break };
        if head.remaining_bits > budget {
            head.remaining_bits -= budget;
            break;
        }
        budget -= head.remaining_bits;
        let p = queue.packets.pop_front().expect("head exists");
        queue.delivered += 1;
        out.push(Delivery {
            app: p.app,
            seq: p.seq,
            bytes: p.bytes,
            delivered_at: arrive,
            delay_ms: (arrive - p.enqueued) as f64,
        });
    }
    out
}
