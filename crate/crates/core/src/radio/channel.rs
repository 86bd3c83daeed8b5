use serde::{Deserialize, Serialize};

use super::{CellId, Point};

/// Thermal noise density at room temperature.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Lower SINR bounds (dB) for CQI 1..=15.
pub const CQI_SINR_THRESHOLDS_DB: [f64; 15] = [
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub id: CellId,
    pub position: Point,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_carrier")]
    pub carrier_ghz: f64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_mhz: f64,
}

fn default_tx_power() -> f64 {
    46.0
}
fn default_carrier() -> f64 {
    3.5
}
fn default_bandwidth() -> f64 {
    100.0
}

impl CellConfig {
    pub fn new(id: u32, x: f64, y: f64) -> Self {
        Self {
            id: CellId(id),
            position: Point::new(x, y),
            tx_power_dbm: default_tx_power(),
            carrier_ghz: default_carrier(),
            bandwidth_mhz: default_bandwidth(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=60.0).contains(&self.tx_power_dbm) {
            return Err(format!("cell {}: tx_power {} dBm outside [0, 60]", self.id, self.tx_power_dbm));
        }
        if !(self.carrier_ghz > 0.0) {
            return Err(format!("cell {}: carrier frequency must be positive", self.id));
        }
        if !(self.bandwidth_mhz > 0.0) {
            return Err(format!("cell {}: bandwidth must be positive", self.id));
        }
        Ok(())
    }
}

/// Simplified urban-macro LOS path loss: `28 + 22 log10(d) + 20 log10(f)`.
///
/// Distances below 1 m are clamped to 1 m.
pub fn path_loss(distance_m: f64, freq_ghz: f64) -> f64 {
    let d = distance_m.max(1.0);
    28.0 + 22.0 * d.log10() + 20.0 * freq_ghz.log10()
}

/// Received power from `cell` at `ue_pos`; positive `shadowing_db` is extra loss.
pub fn rsrp(cell: &CellConfig, ue_pos: Point, shadowing_db: f64) -> f64 {
    let d = cell.position.distance(ue_pos);
    cell.tx_power_dbm - path_loss(d, cell.carrier_ghz) - shadowing_db
}

pub fn noise_floor_dbm(bandwidth_mhz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * (bandwidth_mhz * 1e6).log10() + noise_figure_db
}

pub fn cqi_from_sinr(sinr_db: f64) -> u8 {
    CQI_SINR_THRESHOLDS_DB.iter().filter(|&&th| th <= sinr_db).count() as u8
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Serving-cell SINR with every other cell transmitting at full load.
pub fn sinr_db(serving_rsrp_dbm: f64, interferers_dbm: impl IntoIterator<Item = f64>, noise_dbm: f64) -> f64 {
    let interference: f64 = interferers_dbm.into_iter().map(dbm_to_mw).sum();
    mw_to_dbm(dbm_to_mw(serving_rsrp_dbm) / (interference + dbm_to_mw(noise_dbm)))
}
