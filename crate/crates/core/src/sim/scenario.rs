//! Scenario files: everything a run needs besides the mode and the model.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::radio::{default_cells, CellConfig, Point, RadioParams, UeId, VehicleConfig};
use crate::ric::DEFAULT_SDL_CAPACITY;
use crate::traffic::{LinkModel, OtaConfig, StreamConfig};
use crate::xapps::HoPolicy;

/// How handovers are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoMode {
    /// RAN-side Event A3, executed immediately.
    #[default]
    Default,
    /// Predictive, with the simulator's exact future as forecaster.
    Oracle,
    /// Predictive, with a trained LSTM.
    Lstm,
    /// Predictive, with a trained GRU.
    Gru,
}

impl HoMode {
    pub const ALL: [HoMode; 4] = [HoMode::Default, HoMode::Oracle, HoMode::Lstm, HoMode::Gru];

    pub fn as_str(self) -> &'static str {
        match self {
            HoMode::Default => "default",
            HoMode::Oracle => "oracle",
            HoMode::Lstm => "lstm",
            HoMode::Gru => "gru",
        }
    }

    pub fn is_predictive(self) -> bool {
        self != HoMode::Default
    }

    pub fn needs_model(self) -> bool {
        matches!(self, HoMode::Lstm | HoMode::Gru)
    }
}

impl std::str::FromStr for HoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HoMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected default, oracle, lstm or gru)"))
    }
}

impl std::fmt::Display for HoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "app", rename_all = "lowercase")]
pub enum TrafficApp {
    Stream {
        ue: UeId,
        #[serde(flatten)]
        config: StreamConfig,
    },
    Ota {
        ue: UeId,
        #[serde(flatten)]
        config: OtaConfig,
    },
}

impl TrafficApp {
    pub fn ue(&self) -> UeId {
        match self {
            TrafficApp::Stream { ue, .. } | TrafficApp::Ota { ue, .. } => *ue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RicConfig {
    /// Samples kept per (UE, cell) series.
    pub sdl_capacity: usize,
}

impl Default for RicConfig {
    fn default() -> Self {
        Self { sdl_capacity: DEFAULT_SDL_CAPACITY }
    }
}

fn default_duration() -> u64 {
    200_000
}

fn default_vehicles() -> Vec<VehicleConfig> {
    vec![VehicleConfig { id: UeId(1), route: Vec::new(), speed_mps: 15.0, speed_jitter_mps: 1.0 }]
}

fn default_traffic() -> Vec<TrafficApp> {
    vec![TrafficApp::Stream { ue: UeId(1), config: StreamConfig::default() }]
}

/// The straight 3 km road used when a vehicle names no route.
pub fn default_route() -> Vec<Point> {
    vec![Point::new(0.0, 0.0), Point::new(3000.0, 0.0)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_duration")]
    pub duration_ms: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cells")]
    pub cells: Vec<CellConfig>,
    #[serde(default = "default_vehicles")]
    pub vehicles: Vec<VehicleConfig>,
    /// `t_ms,ue_id,x_m,y_m` positions; when set, replaces `vehicles`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mobility_trace: Option<PathBuf>,
    #[serde(default)]
    pub ho_mode: HoMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_ref: Option<PathBuf>,
    #[serde(default = "default_traffic")]
    pub traffic: Vec<TrafficApp>,
    #[serde(default)]
    pub policy: HoPolicy,
    #[serde(default)]
    pub radio: RadioParams,
    #[serde(default)]
    pub link: LinkModel,
    #[serde(default)]
    pub ric: RicConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("scenario: {e}"))
    }

    /// Reads a scenario file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut s = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut s.model_ref, &mut s.mobility_trace].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }

    pub fn duration(&self) -> super::SimTime {
        super::SimTime::from_ms(self.duration_ms)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.duration_ms == 0 {
            return Err("duration_ms must be > 0".into());
        }
        if self.cells.is_empty() {
            return Err("at least one cell is required".into());
        }
        let mut ids: Vec<_> = self.cells.iter().map(|c| c.id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err("cell ids must be unique".into());
        }
        for c in &self.cells {
            c.validate()?;
        }
        if self.mobility_trace.is_none() {
            if self.vehicles.is_empty() {
                return Err("at least one vehicle is required".into());
            }
            let mut ues: Vec<_> = self.vehicles.iter().map(|v| v.id).collect();
            ues.sort();
            if ues.windows(2).any(|w| w[0] == w[1]) {
                return Err("vehicle ids must be unique".into());
            }
            for v in &self.vehicles {
                v.validate()?;
                if v.route.len() == 1 {
                    return Err(format!("vehicle {}: a route needs two or more points", v.id));
                }
            }
        }
        let r = &self.radio;
        if r.channel_update_ms == 0 || r.report_period_ms == 0 {
            return Err("radio periods must be > 0".into());
        }
        if !r.report_period_ms.is_multiple_of(r.channel_update_ms) {
            return Err("report_period_ms must be a multiple of channel_update_ms".into());
        }
        if r.report_period_ms > u32::MAX as u64 {
            return Err("report_period_ms too large".into());
        }
        if !(r.shadowing_sigma_db >= 0.0) || !(r.decorrelation_m > 0.0) {
            return Err("shadowing parameters out of range".into());
        }
        self.policy.validate()?;
        if !self.policy.check_period_ms.is_multiple_of(r.channel_update_ms) {
            return Err("policy.check_period_ms must be a multiple of channel_update_ms".into());
        }
        self.link.validate()?;
        for app in &self.traffic {
            match app {
                TrafficApp::Stream { config, .. } => config.validate()?,
                TrafficApp::Ota { config, .. } => config.validate()?,
            }
        }
        if self.ric.sdl_capacity == 0 {
            return Err("ric.sdl_capacity must be > 0".into());
        }
        Ok(())
    }
}
