//! Downlink over-the-air software update: constant bit rate packets until
//! the image is delivered.

use serde::{Deserialize, Serialize};

use super::link::{serve_queue, AppKind, Delivery, LinkModel, LinkQueue, Packet};
use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OtaConfig {
    pub total_bytes: u64,
    pub packet_bytes: u32,
    pub interval_ms: u64,
    pub start_ms: u64,
}

impl Default for OtaConfig {
    fn default() -> Self {
        Self { total_bytes: 35_600_000, packet_bytes: 1024, interval_ms: 5, start_ms: 0 }
    }
}

impl OtaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.total_bytes == 0 || self.packet_bytes == 0 || self.interval_ms == 0 {
            return Err("ota: total_bytes, packet_bytes and interval_ms must be > 0".into());
        }
        Ok(())
    }

    pub fn packet_count(&self) -> u64 {
        self.total_bytes.div_ceil(self.packet_bytes as u64)
    }

    pub fn offered_bps(&self) -> f64 {
        self.packet_bytes as f64 * 8.0 * 1000.0 / self.interval_ms as f64
    }

    /// Size of packet `seq`; the last one carries the remainder.
    pub fn packet_size(&self, seq: u64) -> u32 {
        let full = self.packet_bytes as u64;
        (self.total_bytes - seq * full).min(full) as u32
    }

    pub fn send_time(&self, seq: u64) -> SimTime {
        SimTime::from_ms(self.start_ms + seq * self.interval_ms)
    }
}

/// Sender state: the next packet to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct OtaSender {
    cfg: OtaConfig,
    next: u64,
}

impl OtaSender {
    pub fn new(cfg: OtaConfig) -> Self {
        Self { cfg, next: 0 }
    }

    pub fn next_due(&self) -> Option<SimTime> {
        (self.next < self.cfg.packet_count()).then(|| self.cfg.send_time(self.next))
    }

    /// Emits the next packet if it is due at `now`.
    pub fn emit(&mut self, now: SimTime) -> Option<Packet> {
        if self.next_due()? > now {
            return None;
        }
        let p = Packet::new(AppKind::Ota, self.next, self.cfg.packet_size(self.next), now);
        self.next += 1;
        Some(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtaReceiver {
    expected: u64,
    start: SimTime,
    pub packets: u64,
    pub bytes: u64,
    pub completed_at: Option<SimTime>,
}

impl OtaReceiver {
    pub fn new(cfg: &OtaConfig) -> Self {
        Self { expected: cfg.packet_count(), start: SimTime::from_ms(cfg.start_ms), packets: 0, bytes: 0, completed_at: None }
    }

    pub fn receive(&mut self, d: &Delivery) {
        self.packets += 1;
        self.bytes += d.bytes as u64;
        if self.packets == self.expected {
            self.completed_at = Some(d.delivered_at);
        }
    }

    /// Time from the first send to the last delivery.
    pub fn completion_ms(&self) -> Option<u64> {
        self.completed_at.map(|t| t - self.start)
    }

    pub fn mean_throughput_bps(&self, until: SimTime) -> f64 {
        let end = self.completed_at.unwrap_or(until);
        let secs = (end - self.start) as f64 / 1000.0;
        if secs <= 0.0 {
            0.0
        } else {
            self.bytes as f64 * 8.0 / secs
        }
    }
}

/// Runs an OTA transfer over a link held at a constant CQI for at most
/// `horizon_ms`, ticking every millisecond.
pub fn run_ota(cfg: &OtaConfig, link: &LinkModel, cqi: u8, horizon_ms: u64) -> OtaReceiver {
    let mut tx = OtaSender::new(cfg.clone());
    let mut rx = OtaReceiver::new(cfg);
    let mut q = LinkQueue::default();
    for t in 0..horizon_ms {
        let now = SimTime::from_ms(t);
        while let Some(p) = tx.emit(now) {
            q.push(p);
        }
        for d in serve_queue(link, cqi, &mut q, now, 1) {
            if d.delivered_at.as_ms() <= horizon_ms {
                rx.receive(&d);
            }
        }
        if rx.completed_at.is_some() {
            break;
        }
    }
    rx
}
