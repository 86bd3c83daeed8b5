//! Per-run QoS series and their aggregates.
//!
//! Series are kept in long form (`t_ms,ue_id,metric,value`). Aggregates are
//! always computed from those rows, so re-reading the CSV reproduces them.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::link::Delivery;
use super::stream::FreezeEvent;
use crate::radio::UeId;
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cqi,
    DelayMs,
    ThroughputBps,
    FreezeMs,
    OtaCompletionMs,
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::Cqi, Metric::DelayMs, Metric::ThroughputBps, Metric::FreezeMs, Metric::OtaCompletionMs];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cqi => "cqi",
            Metric::DelayMs => "delay_ms",
            Metric::ThroughputBps => "throughput_bps",
            Metric::FreezeMs => "freeze_ms",
            Metric::OtaCompletionMs => "ota_completion_ms",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub t_ms: u64,
    pub ue_id: u32,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mode: String,
    pub seed: u64,
    pub mean_cqi: f64,
    pub mean_delay_ms: f64,
    pub mean_throughput_bps: f64,
    pub freeze_count: u64,
    pub freeze_total_ms: f64,
    pub ota_completion_ms: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

impl Aggregates {
    /// Means of the series; an empty series contributes 0.
    pub fn from_rows(mode: &str, seed: u64, rows: &[MetricRow]) -> Self {
        let of = |m: Metric| rows.iter().filter(move |r| r.metric == m).map(|r| r.value);
        Self {
            mode: mode.to_string(),
            seed,
            mean_cqi: mean(of(Metric::Cqi)).unwrap_or(0.0),
            mean_delay_ms: mean(of(Metric::DelayMs)).unwrap_or(0.0),
            mean_throughput_bps: mean(of(Metric::ThroughputBps)).unwrap_or(0.0),
            freeze_count: of(Metric::FreezeMs).count() as u64,
            freeze_total_ms: of(Metric::FreezeMs).fold(0.0, |a, b| a + b),
            ota_completion_ms: mean(of(Metric::OtaCompletionMs)),
        }
    }

    /// The named aggregate as a number (`None` for a missing OTA result).
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "mean_cqi" | "cqi" => Some(self.mean_cqi),
            "mean_delay_ms" | "delay" | "delay_ms" => Some(self.mean_delay_ms),
            "mean_throughput_bps" | "throughput" | "throughput_bps" => Some(self.mean_throughput_bps),
            "freeze_count" | "freeze" => Some(self.freeze_count as f64),
            "freeze_total_ms" => Some(self.freeze_total_ms),
            "ota_completion_ms" | "ota_completion" => self.ota_completion_ms,
            _ => None,
        }
    }

    pub const METRIC_NAMES: [&'static str; 6] =
        ["mean_cqi", "mean_delay_ms", "mean_throughput_bps", "freeze_count", "freeze_total_ms", "ota_completion_ms"];
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub rows: Vec<MetricRow>,
    pub aggregates: Aggregates,
}

impl RunMetrics {
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_rows(&self.rows, w)
    }

    pub fn aggregates_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.aggregates).expect("aggregates serialize");
        s.push('\n');
        s
    }
}

pub fn write_rows<W: Write>(rows: &[MetricRow], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_ms", "ue_id", "metric", "value"])?;
    for r in rows {
        out.write_record([r.t_ms.to_string(), r.ue_id.to_string(), r.metric.as_str().to_string(), r.value.to_string()])?;
    }
    out.flush()
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<MetricRow>, String> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let get = |i: usize| rec.get(i).ok_or_else(|| format!("short row: {rec:?}"));
        rows.push(MetricRow {
            t_ms: get(0)?.parse().map_err(|e| format!("t_ms: {e}"))?,
            ue_id: get(1)?.parse().map_err(|e| format!("ue_id: {e}"))?,
            metric: get(2)?.parse()?,
            value: get(3)?.parse().map_err(|e| format!("value: {e}"))?,
        });
    }
    Ok(rows)
}

/// Accumulates raw observations during a run.
#[derive(Debug, Clone, Default)]
pub struct MetricsCollector {
    rows: Vec<MetricRow>,
    bits_per_bin: BTreeMap<(u32, u64), f64>,
    ues: Vec<u32>,
}

impl MetricsCollector {
    pub fn new(ues: impl IntoIterator<Item = UeId>) -> Self {
        let mut ues: Vec<u32> = ues.into_iter().map(|u| u.0).collect();
        ues.sort_unstable();
        Self { ues, ..Self::default() }
    }

    pub fn record_cqi(&mut self, t: SimTime, ue: UeId, cqi: u8) {
        self.rows.push(MetricRow { t_ms: t.as_ms(), ue_id: ue.0, metric: Metric::Cqi, value: cqi as f64 });
    }

    pub fn record_delivery(&mut self, ue: UeId, d: &Delivery) {
        let t = d.delivered_at.as_ms();
        self.rows.push(MetricRow { t_ms: t, ue_id: ue.0, metric: Metric::DelayMs, value: d.delay_ms });
        *self.bits_per_bin.entry((ue.0, t / 1000)).or_default() += d.bytes as f64 * 8.0;
    }

    pub fn record_freezes(&mut self, ue: UeId, events: &[FreezeEvent]) {
        for f in events {
            self.rows.push(MetricRow {
                t_ms: f.start_ms.floor() as u64,
                ue_id: ue.0,
                metric: Metric::FreezeMs,
                value: f.duration_ms,
            });
        }
    }

    pub fn record_ota_completion(&mut self, t: SimTime, ue: UeId, completion_ms: u64) {
        self.rows.push(MetricRow {
            t_ms: t.as_ms(),
            ue_id: ue.0,
            metric: Metric::OtaCompletionMs,
            value: completion_ms as f64,
        });
    }

    /// Adds one goodput row per UE per whole second of the run, then orders
    /// rows by time (stable) and computes the aggregates.
    pub fn finalize(mut self, mode: &str, seed: u64, duration: SimTime) -> RunMetrics {
        let bins = duration.as_ms().div_ceil(1000);
        for &ue in &self.ues {
            for b in 0..bins {
                let width_s = ((b + 1) * 1000).min(duration.as_ms()) - b * 1000;
                let bits = self.bits_per_bin.get(&(ue, b)).copied().unwrap_or(0.0);
                self.rows.push(MetricRow {
                    t_ms: b * 1000,
                    ue_id: ue,
                    metric: Metric::ThroughputBps,
                    value: bits * 1000.0 / width_s as f64,
                });
            }
        }
        self.rows.sort_by_key(|r| r.t_ms);
        let aggregates = Aggregates::from_rows(mode, seed, &self.rows);
        RunMetrics { rows: self.rows, aggregates }
    }
}
