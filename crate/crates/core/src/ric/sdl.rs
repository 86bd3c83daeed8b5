use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use crate::radio::{CellId, MeasurementReport, UeId};
use crate::sim::SimTime;

use super::RicError;

pub const DEFAULT_SDL_CAPACITY: usize = 256;

/// Shared data layer: bounded per-(UE, cell) RSRP history plus the
/// latest full report per UE.
#[derive(Debug, Clone)]
pub struct SdlStore {
    capacity: usize,
    series: BTreeMap<(UeId, CellId), VecDeque<(SimTime, f64)>>,
    latest: BTreeMap<UeId, MeasurementReport>,
}

impl Default for SdlStore {
    fn default() -> Self {
        Self::new(DEFAULT_SDL_CAPACITY)
    }
}

impl SdlStore {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "SDL capacity must be positive");
        Self { capacity, series: BTreeMap::new(), latest: BTreeMap::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn put(&mut self, ue: UeId, cell: CellId, t: SimTime, rsrp_dbm: f64) -> Result<(), RicError> {
        let buf = self.series.entry((ue, cell)).or_default();
        if let Some(&(last, _)) = buf.back() {
            if t <= last {
                return Err(RicError::NonMonotone { ue, cell, t, last });
            }
        }
        if buf.len() == self.capacity {
            buf.pop_front();
        }
        buf.push_back((t, rsrp_dbm));
        Ok(())
    }

    /// Last `min(n, stored)` samples in ascending time order.
    pub fn window(&self, ue: UeId, cell: CellId, n: usize) -> Vec<(SimTime, f64)> {
        match self.series.get(&(ue, cell)) {
            Some(buf) => buf.iter().skip(buf.len().saturating_sub(n)).copied().collect(),
            None => Vec::new(),
        }
    }

    pub fn set_latest(&mut self, report: MeasurementReport) {
        self.latest.insert(report.ue, report);
    }

    pub fn latest(&self, ue: UeId) -> Option<&MeasurementReport> {
        self.latest.get(&ue)
    }

    pub fn ues(&self) -> impl Iterator<Item = UeId> + '_ {
        self.latest.keys().copied()
    }

    pub fn series_len(&self, ue: UeId, cell: CellId) -> usize {
        self.series.get(&(ue, cell)).map_or(0, |b| b.len())
    }

    /// Writes `ue_id,cell_id,t_ms,rsrp_dbm` rows for every stored sample.
    pub fn dump_csv<W: Write>(&self, out: W) -> Result<(), RicError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ue_id", "cell_id", "t_ms", "rsrp_dbm"])?;
        for ((ue, cell), buf) in &self.series {
            for (t, rsrp) in buf {
                w.write_record([ue.0.to_string(), cell.0.to_string(), t.as_ms().to_string(), rsrp.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the store as a training dataset: `t_ms,ue_id,cell_id,rsrp_dbm`
    /// rows ordered by time, then UE, then cell.
    pub fn dump_dataset_csv<W: Write>(&self, out: W) -> Result<(), RicError> {
        let mut rows: Vec<(SimTime, UeId, CellId, f64)> = self
            .series
            .iter()
            .flat_map(|(&(ue, cell), buf)| buf.iter().map(move |&(t, r)| (t, ue, cell, r)))
            .collect();
        rows.sort_by_key(|r| (r.0, r.1, r.2));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_ms", "ue_id", "cell_id", "rsrp_dbm"])?;
        for (t, ue, cell, rsrp) in rows {
            w.write_record([t.as_ms().to_string(), ue.0.to_string(), cell.0.to_string(), rsrp.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
