//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

pub mod messages;
pub mod scan;

use ricsim::nn::{CellKind, RecurrentModel};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gate matrices of one layer unpacked from the flat layout into
/// `w[gate][unit][input]`, `u[gate][unit][hidden]`, `b[gate][unit]`.
pub struct RefLayer {
    pub w: Vec<Vec<Vec<f64>>>,
    pub u: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
}

pub fn unpack(model: &RecurrentModel) -> (Vec<RefLayer>, Vec<f64>, f64) {
    let p = model.params();
    let gates = model.config().arch.gates();
    let mut at = 0;
    let mut layers = Vec::new();
    for l in model.layers() {
        let gu = gates * l.units;
        let kernel = &p[at..at + l.input * gu];
        let rec = &p[at + l.input * gu..at + (l.input + l.units) * gu];
        let bias = &p[at + (l.input + l.units) * gu..at + (l.input + l.units + 1) * gu];
        at += (l.input + l.units + 1) * gu;
        let w = (0..gates)
            .map(|g| (0..l.units).map(|j| (0..l.input).map(|k| kernel[k * gu + g * l.units + j]).collect()).collect())
            .collect();
        let u = (0..gates)
            .map(|g| (0..l.units).map(|j| (0..l.units).map(|k| rec[k * gu + g * l.units + j]).collect()).collect())
            .collect();
        let b = (0..gates).map(|g| (0..l.units).map(|j| bias[g * l.units + j]).collect()).collect();
        layers.push(RefLayer { w, u, b });
    }
    let top = model.layers().last().unwrap().units;
    (layers, p[at..at + top].to_vec(), p[at + top])
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn ref_gru_step(l: &RefLayer, x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let pre = |g: usize, hh: &[f64]| -> Vec<f64> {
        let a = matvec(&l.w[g], x);
        let c = matvec(&l.u[g], hh);
        (0..n).map(|j| a[j] + c[j] + l.b[g][j]).collect()
    };
    let z: Vec<f64> = pre(0, h).into_iter().map(sig).collect();
    let r: Vec<f64> = pre(1, h).into_iter().map(sig).collect();
    let rh: Vec<f64> = (0..n).map(|j| r[j] * h[j]).collect();
    let hc: Vec<f64> = pre(2, &rh).into_iter().map(f64::tanh).collect();
    (0..n).map(|j| (1.0 - z[j]) * h[j] + z[j] * hc[j]).collect()
}

pub fn ref_lstm_step(l: &RefLayer, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = h.len();
    let pre = |g: usize| -> Vec<f64> {
        let a = matvec(&l.w[g], x);
        let b = matvec(&l.u[g], h);
        (0..n).map(|j| a[j] + b[j] + l.b[g][j]).collect()
    };
    let i: Vec<f64> = pre(0).into_iter().map(sig).collect();
    let f: Vec<f64> = pre(1).into_iter().map(sig).collect();
    let g: Vec<f64> = pre(2).into_iter().map(f64::tanh).collect();
    let o: Vec<f64> = pre(3).into_iter().map(sig).collect();
    let c2: Vec<f64> = (0..n).map(|j| f[j] * c[j] + i[j] * g[j]).collect();
    let h2 = (0..n).map(|j| o[j] * c2[j].tanh()).collect();
    (h2, c2)
}

/// Inference forward pass written directly from the cell equations.
pub fn ref_forward(model: &RecurrentModel, window: &[f64]) -> f64 {
    let (layers, dw, db) = unpack(model);
    let mut seq: Vec<Vec<f64>> = window.iter().map(|v| vec![v.clamp(0.0, 1.0)]).collect();
    for (li, l) in layers.iter().enumerate() {
        let n = model.layers()[li].units;
        let mut h = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut out = Vec::new();
        for x in &seq {
            match model.config().arch {
                CellKind::Gru => h = ref_gru_step(l, x, &h),
                CellKind::Lstm => (h, c) = ref_lstm_step(l, x, &h, &c),
            }
            out.push(h.clone());
        }
        seq = out;
    }
    let last = seq.last().unwrap();
    let y = db + dw.iter().zip(last).map(|(a, b)| a * b).sum::<f64>();
    model.config().activation.apply(y)
}

/// Largest relative error between analytic and central-difference
/// gradients of the batch MSE. Relative error uses
/// `max(|a|, |n|, floor)` as denominator.
pub fn gradient_check(model: &RecurrentModel, samples: &[(&[f64], f64)], eps: f64, floor: f64) -> f64 {
    let (_, g) = model.loss_and_grad(samples, None);
    let mut m = model.clone();
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let orig = m.params()[i];
        m.params_mut()[i] = orig + eps;
        let lp = mse(&m, samples);
        m.params_mut()[i] = orig - eps;
        let lm = mse(&m, samples);
        m.params_mut()[i] = orig;
        let num = (lp - lm) / (2.0 * eps);
        let rel = (g[i] - num).abs() / g[i].abs().max(num.abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

pub fn mse(model: &RecurrentModel, samples: &[(&[f64], f64)]) -> f64 {
    samples
        .iter()
        .map(|(w, t)| {
            let e = ref_forward(model, w) - t;
            e * e
        })
        .sum::<f64>()
        / samples.len() as f64
}
