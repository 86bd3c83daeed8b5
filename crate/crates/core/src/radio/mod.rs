//! Radio environment: mobility, propagation, SINR/CQI and measurement reports.

mod channel;
mod mobility;
mod shadowing;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{
    cqi_from_sinr, dbm_to_mw, mw_to_dbm, noise_floor_dbm, path_loss, rsrp, sinr_db, CellConfig,
    CQI_SINR_THRESHOLDS_DB, THERMAL_NOISE_DBM_HZ,
};
pub use mobility::{advance_to, load_mobility_trace, step_mobility, Motion, Route, TimedTrace, VehicleConfig, VehicleState};
pub use shadowing::ShadowField;

use crate::sim::{rng_stream, SimTime};

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("route must contain at least one waypoint")]
    EmptyRoute,
    #[error("mobility trace: {0}")]
    Trace(String),
    #[error("no cells configured")]
    NoCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UeId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for UeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, frac: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * frac, self.y + (other.y - self.y) * frac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsrpEntry {
    pub cell: CellId,
    pub rsrp_dbm: f64,
}

/// One UE measurement: RSRP of every cell, serving-cell SINR and CQI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub ue: UeId,
    pub t: SimTime,
    pub serving: CellId,
    /// Sorted by cell id; always contains `serving`.
    pub entries: Vec<RsrpEntry>,
    pub sinr_db: f64,
    pub cqi: u8,
}

impl MeasurementReport {
    pub fn rsrp_of(&self, cell: CellId) -> Option<f64> {
        self.entries.iter().find(|e| e.cell == cell).map(|e| e.rsrp_dbm)
    }

    /// Strongest non-serving cell; ties go to the lower cell id.
    pub fn best_neighbor(&self) -> Option<RsrpEntry> {
        self.entries
            .iter()
            .filter(|e| e.cell != self.serving)
            .fold(None, |best: Option<RsrpEntry>, e| match best {
                Some(b) if b.rsrp_dbm >= e.rsrp_dbm => Some(b),
                _ => Some(*e),
            })
    }
}

/// Builds a report for `ue` given per-cell shadowing (same order as `cells`).
pub fn make_report(
    ue: &VehicleState,
    cells: &[CellConfig],
    shadowing_db: &[f64],
    t: SimTime,
    noise_figure_db: f64,
) -> MeasurementReport {
    assert!(!cells.is_empty(), "make_report needs at least one cell");
    assert_eq!(cells.len(), shadowing_db.len());
    let mut entries: Vec<RsrpEntry> = cells
        .iter()
        .zip(shadowing_db)
        .map(|(c, s)| RsrpEntry { cell: c.id, rsrp_dbm: rsrp(c, ue.position, *s) })
        .collect();
    entries.sort_by_key(|e| e.cell);
    let serving_cell = cells.iter().find(|c| c.id == ue.serving).expect("serving cell must be configured");
    let serving_rsrp = entries.iter().find(|e| e.cell == ue.serving).unwrap().rsrp_dbm;
    let noise = noise_floor_dbm(serving_cell.bandwidth_mhz, noise_figure_db);
    let sinr = sinr_db(serving_rsrp, entries.iter().filter(|e| e.cell != ue.serving).map(|e| e.rsrp_dbm), noise);
    MeasurementReport { ue: ue.id, t, serving: ue.serving, entries, sinr_db: sinr, cqi: cqi_from_sinr(sinr) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioParams {
    pub report_period_ms: u64,
    pub channel_update_ms: u64,
    pub shadowing_enabled: bool,
    pub shadowing_sigma_db: f64,
    pub decorrelation_m: f64,
    pub noise_figure_db: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            report_period_ms: 1000,
            channel_update_ms: 100,
            shadowing_enabled: true,
            shadowing_sigma_db: 4.0,
            decorrelation_m: 50.0,
            noise_figure_db: 7.0,
        }
    }
}

/// Immutable propagation state of a run: cells plus per-(UE, cell) shadowing.
#[derive(Debug, Clone)]
pub struct RadioEnv {
    cells: Vec<CellConfig>,
    params: RadioParams,
    shadowing: BTreeMap<(UeId, CellId), ShadowField>,
}

impl RadioEnv {
    pub fn new(mut cells: Vec<CellConfig>, params: RadioParams) -> Result<Self, RadioError> {
        if cells.is_empty() {
            return Err(RadioError::NoCells);
        }
        cells.sort_by_key(|c| c.id);
        Ok(Self { cells, params, shadowing: BTreeMap::new() })
    }

    /// Draws the shadowing fields for one UE, covering `length_m` of travel.
    pub fn add_ue(&mut self, ue: UeId, length_m: f64, seed: u64) {
        for cell in &self.cells {
            let field = if self.params.shadowing_enabled {
                let mut rng = rng_stream(&format!("shadowing/ue{}/cell{}", ue.0, cell.id.0), seed);
                ShadowField::generate(&mut rng, self.params.shadowing_sigma_db, self.params.decorrelation_m, length_m)
            } else {
                ShadowField::zero()
            };
            self.shadowing.insert((ue, cell.id), field);
        }
    }

    pub fn cells(&self) -> &[CellConfig] {
        &self.cells
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    pub fn shadowing_at(&self, ue: UeId, cell: CellId, travelled_m: f64) -> f64 {
        self.shadowing.get(&(ue, cell)).map_or(0.0, |f| f.value_at(travelled_m))
    }

    pub fn rsrp(&self, ue: &VehicleState, cell: CellId) -> Option<f64> {
        let c = self.cells.iter().find(|c| c.id == cell)?;
        Some(rsrp(c, ue.position, self.shadowing_at(ue.id, cell, ue.travelled_m)))
    }

    /// Strongest cell at the UE's current position.
    pub fn best_cell(&self, ue: &VehicleState) -> CellId {
        let mut best = self.cells[0].id;
        let mut best_rsrp = f64::NEG_INFINITY;
        for c in &self.cells {
            let r = self.rsrp(ue, c.id).unwrap();
            if r > best_rsrp {
                best = c.id;
                best_rsrp = r;
            }
        }
        best
    }

    pub fn measure(&self, ue: &VehicleState, t: SimTime) -> MeasurementReport {
        let shadows: Vec<f64> =
            self.cells.iter().map(|c| self.shadowing_at(ue.id, c.id, ue.travelled_m)).collect();
        make_report(ue, &self.cells, &shadows, t, self.params.noise_figure_db)
    }
}

/// The default layout: three gNodeBs along a 3 km road, 35 m off-axis.
pub fn default_cells() -> Vec<CellConfig> {
    vec![CellConfig::new(1, 500.0, 35.0), CellConfig::new(2, 1500.0, 35.0), CellConfig::new(3, 2500.0, 35.0)]
}
