//! Uplink video stream: variable-size frames at a fixed period, and a
//! receiver-side playback model that turns arrival times into freezes.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamConfig {
    pub frame_period_ms: u64,
    /// Mean of the synthetic log-normal frame sizes.
    pub mean_frame_bytes: f64,
    /// Shape of the log-normal (standard deviation of `ln size`).
    pub frame_size_sigma: f64,
    /// Explicit frame sizes; replayed cyclically instead of drawing.
    pub frame_sizes: Option<Vec<u32>>,
    pub prebuffer_frames: usize,
    pub start_ms: u64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            frame_period_ms: 100,
            mean_frame_bytes: 50_000.0,
            frame_size_sigma: 0.3,
            frame_sizes: None,
            prebuffer_frames: 3,
            start_ms: 0,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.frame_period_ms == 0 {
            return Err("stream: frame_period_ms must be > 0".into());
        }
        if !(self.mean_frame_bytes >= 1.0) || !(self.frame_size_sigma >= 0.0) {
            return Err("stream: frame size parameters out of range".into());
        }
        if self.frame_sizes.as_ref().is_some_and(|s| s.is_empty() || s.contains(&0)) {
            return Err("stream: frame size trace must be non-empty and positive".into());
        }
        if self.prebuffer_frames == 0 {
            return Err("stream: prebuffer_frames must be >= 1".into());
        }
        Ok(())
    }
}

/// Produces frame sizes: the configured trace, or log-normal draws whose
/// mean is `mean_frame_bytes`.
pub struct FrameSource {
    trace: Option<Vec<u32>>,
    dist: LogNormal<f64>,
    next: usize,
}

impl FrameSource {
    pub fn new(cfg: &StreamConfig) -> Self {
        let sigma = cfg.frame_size_sigma;
        let mu = cfg.mean_frame_bytes.ln() - sigma * sigma / 2.0;
        Self {
            trace: cfg.frame_sizes.clone(),
            dist: LogNormal::new(mu, sigma).expect("validated"),
            next: 0,
        }
    }

    pub fn next_size<R: Rng>(&mut self, rng: &mut R) -> u32 {
        match &self.trace {
            Some(t) => {
                let s = t[self.next % t.len()];
                self.next += 1;
                s
            }
            None => (self.dist.sample(rng).round() as u32).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezeEvent {
    pub start_ms: f64,
    pub duration_ms: f64,
}

/// Playback of in-order frame arrivals (ms). Playback starts once
/// `prebuffer_frames` frames are in; frame `n` is shown at
/// `max(arrival_n, display_{n-1} + period)`. A display gap longer than the
/// period is a freeze of `gap - period`, starting when the previous frame's
/// slot ran out.
pub fn stream_receiver(arrivals: &[f64], frame_period_ms: u64, prebuffer_frames: usize) -> Vec<FreezeEvent> {
    let period = frame_period_ms as f64;
    let mut out = Vec::new();
    if arrivals.is_empty() {
        return out;
    }
    let start_idx = prebuffer_frames.min(arrivals.len()) - 1;
    let mut display = arrivals[..=start_idx].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &a in &arrivals[1..] {
        // compare against the slot end directly, so rounding in `next - display` never invents a freeze
        let slot_end = display + period;
        if a > slot_end {
            out.push(FreezeEvent { start_ms: slot_end, duration_ms: a - slot_end });
        }
        display = a.max(slot_end);
    }
    out
}
