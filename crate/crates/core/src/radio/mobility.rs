use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CellId, Point, RadioError, UeId};
use crate::sim::SimTime;

/// Piecewise-linear route with precomputed cumulative arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Route {
    pub fn new(points: Vec<Point>) -> Result<Self, RadioError> {
        if points.is_empty() {
            return Err(RadioError::EmptyRoute);
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += w[0].distance(w[1]);
            cumulative.push(acc);
        }
        Ok(Self { points, cumulative })
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Point at arc length `s`, clamped to the route ends.
    pub fn point_at(&self, s: f64) -> Point {
        if s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return *self.points.last().unwrap();
        }
        let seg = self.cumulative.partition_point(|&c| c <= s) - 1;
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        if seg_len == 0.0 {
            return self.points[seg];
        }
        let frac = (s - self.cumulative[seg]) / seg_len;
        self.points[seg].lerp(self.points[seg + 1], frac)
    }
}

/// Timestamped positions for one UE, as imported from a mobility trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedTrace {
    samples: Vec<(u64, Point)>,
    cumulative: Vec<f64>,
}

impl TimedTrace {
    pub fn new(mut samples: Vec<(u64, Point)>) -> Result<Self, RadioError> {
        if samples.is_empty() {
            return Err(RadioError::EmptyRoute);
        }
        samples.sort_by_key(|s| s.0);
        samples.dedup_by_key(|s| s.0);
        let mut cumulative = vec![0.0];
        for w in samples.windows(2) {
            cumulative.push(cumulative.last().unwrap() + w[0].1.distance(w[1].1));
        }
        Ok(Self { samples, cumulative })
    }

    /// Index of the segment containing `t_ms` and the fraction along it.
    fn locate(&self, t_ms: u64) -> (usize, f64) {
        let i = self.samples.partition_point(|s| s.0 <= t_ms);
        if i == 0 {
            return (0, 0.0);
        }
        if i == self.samples.len() {
            return (i - 1, 0.0);
        }
        let (t0, t1) = (self.samples[i - 1].0, self.samples[i].0);
        (i - 1, (t_ms - t0) as f64 / (t1 - t0) as f64)
    }

    pub fn position_at(&self, t_ms: u64) -> Point {
        let (i, frac) = self.locate(t_ms);
        if frac == 0.0 {
            return self.samples[i].1;
        }
        self.samples[i].1.lerp(self.samples[i + 1].1, frac)
    }

    /// Path length covered by `t_ms`.
    pub fn travelled_at(&self, t_ms: u64) -> f64 {
        let (i, frac) = self.locate(t_ms);
        if frac == 0.0 {
            return self.cumulative[i];
        }
        self.cumulative[i] + (self.cumulative[i + 1] - self.cumulative[i]) * frac
    }

    /// Total path length, used to size per-UE shadowing fields.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }
}

/// Reads a `t_ms,ue_id,x_m,y_m` trace file, grouped by UE.
pub fn load_mobility_trace(path: &Path) -> Result<Vec<(UeId, TimedTrace)>, RadioError> {
    #[derive(Deserialize)]
    struct Row {
        t_ms: u64,
        ue_id: u32,
        x_m: f64,
        y_m: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| RadioError::Trace(e.to_string()))?;
    let mut by_ue: std::collections::BTreeMap<u32, Vec<(u64, Point)>> = Default::default();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| RadioError::Trace(e.to_string()))?;
        by_ue.entry(row.ue_id).or_default().push((row.t_ms, Point::new(row.x_m, row.y_m)));
    }
    by_ue
        .into_iter()
        .map(|(ue, samples)| Ok((UeId(ue), TimedTrace::new(samples)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    /// Constant speed along a polyline, stopping at its end.
    Route { route: Arc<Route>, speed_mps: f64 },
    Trace(Arc<TimedTrace>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleConfig {
    pub id: UeId,
    #[serde(default)]
    pub route: Vec<Point>,
    #[serde(default = "default_speed")]
    pub speed_mps: f64,
    /// Half-width of the uniform per-run speed draw around `speed_mps`.
    #[serde(default)]
    pub speed_jitter_mps: f64,
}

fn default_speed() -> f64 {
    15.0
}

impl VehicleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.speed_mps > 0.0) {
            return Err(format!("vehicle {}: speed must be positive", self.id));
        }
        if self.speed_jitter_mps < 0.0 || self.speed_jitter_mps >= self.speed_mps {
            return Err(format!("vehicle {}: speed jitter must be in [0, speed)", self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: UeId,
    pub motion: Motion,
    pub elapsed: SimTime,
    /// Arc length covered so far; indexes the shadowing fields.
    pub travelled_m: f64,
    pub position: Point,
    pub serving: CellId,
}

impl VehicleState {
    pub fn on_route(id: UeId, route: Arc<Route>, speed_mps: f64, serving: CellId) -> Self {
        let position = route.point_at(0.0);
        Self { id, motion: Motion::Route { route, speed_mps }, elapsed: SimTime::ZERO, travelled_m: 0.0, position, serving }
    }

    pub fn on_trace(id: UeId, trace: Arc<TimedTrace>, serving: CellId) -> Self {
        let position = trace.position_at(0);
        Self { id, motion: Motion::Trace(trace), elapsed: SimTime::ZERO, travelled_m: 0.0, position, serving }
    }

    /// Upper bound on `travelled_m` over the whole motion.
    pub fn max_travel(&self) -> f64 {
        match &self.motion {
            Motion::Route { route, .. } => route.length(),
            Motion::Trace(trace) => trace.length(),
        }
    }
}

/// Advances a vehicle by `dt_ms`.
pub fn step_mobility(state: &VehicleState, dt_ms: u64) -> VehicleState {
    let mut next = state.clone();
    next.elapsed = state.elapsed + dt_ms;
    match &state.motion {
        Motion::Route { route, speed_mps } => {
            let s = (state.travelled_m + speed_mps * dt_ms as f64 / 1000.0).min(route.length());
            next.travelled_m = s;
            next.position = route.point_at(s);
        }
        Motion::Trace(trace) => {
            next.travelled_m = trace.travelled_at(next.elapsed.as_ms());
            next.position = trace.position_at(next.elapsed.as_ms());
        }
    }
    next
}

/// Steps `state` forward to `to` on a fixed grid so that every caller
/// reaches the same floating-point state for the same target time.
pub fn advance_to(state: &VehicleState, to: SimTime, grid_ms: u64) -> VehicleState {
    let mut s = state.clone();
    while s.elapsed < to {
        let next_grid = (s.elapsed.as_ms() / grid_ms + 1) * grid_ms;
        let dt = next_grid.min(to.as_ms()) - s.elapsed.as_ms();
        s = step_mobility(&s, dt);
    }
    s
}
