//! Brute-force oracles for the handover decision logic.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ricsim::radio::{CellId, MeasurementReport, RsrpEntry, UeId};
use ricsim::ric::SdlStore;
use ricsim::sim::SimTime;
use ricsim::xapps::{baseline_ho_check, qp_predict, HoDecision, HoPolicy, PredictionRequest, ScriptedForecaster};

const UE: UeId = UeId(1);
const SERV: CellId = CellId(1);
const TGT: CellId = CellId(2);

/// Brute force over the whole horizon, no early exit.
pub fn brute(serv: &[f64], tgt: &[f64], hom: f64, step_ms: u64) -> (Option<u32>, Option<u32>, u64) {
    let inv = (0..serv.len()).filter(|&k| tgt[k] > serv[k]).map(|k| k as u32 + 1).min();
    let a3 = (0..serv.len()).filter(|&k| tgt[k] - hom > serv[k]).map(|k| k as u32 + 1).min();
    let ttt = match (inv, a3) {
        (Some(i), Some(_)) => i as u64 * step_ms,
        _ => 0,
    };
    (inv, a3, ttt)
}

fn script(rng: &mut ChaCha8Rng, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut s: f64 = -90.0 + rng.random_range(-10.0..10.0);
    let mut t: f64 = s + rng.random_range(-8.0..4.0);
    let drift = rng.random_range(-1.5..1.5);
    let quantize = rng.random_bool(0.3);
    let mut serv = Vec::with_capacity(len);
    let mut tgt = Vec::with_capacity(len);
    for _ in 0..len {
        s += rng.random_range(-1.0..1.0) - drift / 2.0;
        t += rng.random_range(-1.0..1.0) + drift / 2.0;
        // coarse values force exact ties at the inversion and A3 thresholds
        let (sv, tv) = if quantize { (s.round(), t.round()) } else { (s, t) };
        serv.push(sv);
        tgt.push(tv);
    }
    (serv, tgt)
}

fn trace_report(t: u64, serving: CellId, rsrp: &[f64]) -> MeasurementReport {
    MeasurementReport {
        ue: UE,
        t: SimTime::from_ms(t),
        serving,
        entries: rsrp.iter().enumerate().map(|(i, &r)| RsrpEntry { cell: CellId(i as u32 + 1), rsrp_dbm: r }).collect(),
        sinr_db: 0.0,
        cqi: 7,
    }
}

/// Three cells along a line, RSRP in dB as a function of time, with a
/// deterministic ripple.
fn trace(k: u64, wobble: f64) -> [f64; 3] {
    let x = k as f64 * 15.0;
    let ripple = |c: f64| wobble * ((x + c * 37.0) / 40.0).sin();
    let cell = |c: f64| -60.0 - 0.03 * (x - c).abs() + ripple(c);
    [cell(500.0), cell(1500.0), cell(2500.0)]
}

/// Every instant at which the strongest neighbour clears the margin,
/// followed by sequential application of the guard.
fn brute_a3_instants(reports: &[[f64; 3]], hom: f64, guard_ms: u64, period_ms: u64) -> Vec<(u64, u32)> {
    let mut serving = 0usize;
    let mut last: Option<u64> = None;
    let mut out = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let t = k as u64 * period_ms;
        if last.is_some_and(|l| t < l + guard_ms) {
            continue;
        }
        let mut best: Option<usize> = None;
        for c in 0..3 {
            if c != serving && best.is_none_or(|b| r[c] > r[b]) {
                best = Some(c);
            }
        }
        let b = best.unwrap();
        if r[b] - hom > r[serving] {
            out.push((t, b as u32 + 1));
            serving = b;
            last = Some(t);
        }
    }
    out
}

/// Runs `cases` randomized scripted futures through `qp_predict` with a
/// perfect forecaster and compares against [`brute`]. Returns the failing
/// case descriptions and the number of handover decisions.
pub fn oracle_scan(cases: usize, seed: u64) -> (Vec<String>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut handovers = 0;
    let mut bad = Vec::new();
    for case in 0..cases {
        let policy = HoPolicy {
            hom_db: [0.0, 1.0, 2.0, 3.0, 4.5][case % 5],
            horizon_n: rng.random_range(1..=15),
            prediction_step_ms: [100, 500, 1000][case % 3],
            ..HoPolicy::default()
        };
        let now_idx = rng.random_range(0..20usize);
        let len = now_idx + policy.horizon_n + 1;
        let (serv, tgt) = script(&mut rng, len);
        let now = SimTime::from_ms(now_idx as u64 * policy.prediction_step_ms);

        let mut sdl = SdlStore::new(8);
        sdl.put(UE, SERV, now, serv[now_idx]).unwrap();
        sdl.put(UE, TGT, now, tgt[now_idx]).unwrap();
        let oracle = ScriptedForecaster {
            scripts: BTreeMap::from([((UE, SERV), serv.clone()), ((UE, TGT), tgt.clone())]),
        };
        let req = PredictionRequest { ue: UE, serving: SERV, target: TGT, issued_at: now };
        let got = qp_predict(&req, &policy, &oracle, &sdl, now);

        let fut = now_idx + 1..=now_idx + policy.horizon_n;
        let (inv, a3, ttt) = brute(&serv[fut.clone()], &tgt[fut], policy.hom_db, policy.prediction_step_ms);
        let got_ttt = match got.decision {
            HoDecision::Handover { target, ttt_ms } => {
                handovers += 1;
                if target != TGT {
                    bad.push(format!("case {case}: target {target}"));
                }
                ttt_ms
            }
            HoDecision::NoHandover => 0,
        };
        // the scan stops at A3, so inversion is compared over the same prefix either way
        if got.flag.is_some() || got.a3_step != a3 || got.inversion_step != inv || got_ttt != ttt {
            bad.push(format!(
                "case {case}: got ({:?}, {:?}, {got_ttt}) want ({inv:?}, {a3:?}, {ttt})",
                got.inversion_step, got.a3_step
            ));
        }
    }
    (bad, handovers)
}

/// Ripple amplitudes, margins and guards of the deterministic baseline traces.
pub const BASELINE_TRACES: [(f64, f64, u64); 5] =
    [(0.0, 3.0, 2000), (4.0, 3.0, 2000), (6.0, 1.0, 0), (6.0, 0.0, 5000), (2.5, 3.0, 1000)];

/// Trigger instants of `baseline_ho_check` and of the brute-force scan on
/// one deterministic trace.
pub fn baseline_instants(wobble: f64, hom: f64, guard_ms: u64) -> (Vec<(u64, u32)>, Vec<(u64, u32)>) {
    let period = 1000;
    let reports: Vec<[f64; 3]> = (0..200).map(|k| trace(k, wobble)).collect();
    let mut serving = SERV;
    let mut last = None;
    let mut got = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let now = SimTime::from_ms(k as u64 * period);
        if let Some(target) = baseline_ho_check(&trace_report(now.as_ms(), serving, r), hom, last, guard_ms, now) {
            got.push((now.as_ms(), target.0));
            serving = target;
            last = Some(now);
        }
    }
    (got, brute_a3_instants(&reports, hom, guard_ms, period))
}
