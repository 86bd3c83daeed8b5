//! GRU and LSTM cells with sequence-level backpropagation through time.
//!
//! Parameter blocks per layer, all row-major:
//! `kernel` is `input x G*units`, `recurrent` is `units x G*units`,
//! `bias` is `G*units`. Gate blocks are ordered `z, r, h` for GRU and
//! `i, f, g, o` for LSTM.

use serde::{Deserialize, Serialize};

use super::linalg::{affine_rows, axpy, dot, sigmoid};
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Gru,
    Lstm,
}

impl CellKind {
    pub fn gates(self) -> usize {
        match self {
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CellParams<'a> {
    pub kernel: &'a [f64],
    pub recurrent: &'a [f64],
    pub bias: &'a [f64],
}

pub struct CellGrads<'a> {
    pub kernel: &'a mut [f64],
    pub recurrent: &'a mut [f64],
    pub bias: &'a mut [f64],
}

fn check_shapes(kind: CellKind, p: &CellParams<'_>, input: usize, units: usize) -> Result<(), NnError> {
    let g = kind.gates() * units;
    if p.kernel.len() != input * g || p.recurrent.len() != units * g || p.bias.len() != g {
        return Err(NnError::Shape(format!(
            "{kind:?} cell with input {input}, units {units}: got kernel {}, recurrent {}, bias {}",
            p.kernel.len(),
            p.recurrent.len(),
            p.bias.len()
        )));
    }
    Ok(())
}

/// One GRU step: `h' = (1 - z) * h + z * tanh(W_h x + U_h (r * h) + b_h)`.
pub fn gru_cell(x: &[f64], h: &[f64], p: &CellParams<'_>) -> Result<Vec<f64>, NnError> {
    check_shapes(CellKind::Gru, p, x.len(), h.len())?;
    let mut gates = vec![0.0; 3 * h.len()];
    let mut out = vec![0.0; h.len()];
    gru_step(x, h, p, &mut gates, &mut out);
    Ok(out)
}

/// One LSTM step returning `(h', c')`.
pub fn lstm_cell(x: &[f64], h: &[f64], c: &[f64], p: &CellParams<'_>) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    check_shapes(CellKind::Lstm, p, x.len(), h.len())?;
    if c.len() != h.len() {
        return Err(NnError::Shape(format!("cell state {} vs hidden {}", c.len(), h.len())));
    }
    let mut gates = vec![0.0; 4 * h.len()];
    let mut h_out = vec![0.0; h.len()];
    let mut c_out = vec![0.0; h.len()];
    lstm_step(x, h, c, p, &mut gates, &mut h_out, &mut c_out);
    Ok((h_out, c_out))
}

/// `gates` receives the post-activation `[z, r, h~]`.
fn gru_step(x: &[f64], h: &[f64], p: &CellParams<'_>, gates: &mut [f64], h_out: &mut [f64]) {
    let u = h.len();
    let g3 = 3 * u;
    affine_rows(p.bias, x, p.kernel, gates);
    for (k, hk) in h.iter().enumerate() {
        axpy(*hk, &p.recurrent[k * g3..k * g3 + 2 * u], &mut gates[..2 * u]);
    }
    for a in &mut gates[..2 * u] {
        *a = sigmoid(*a);
    }
    let (zr, cand) = gates.split_at_mut(2 * u);
    for k in 0..u {
        let rh = zr[u + k] * h[k];
        if rh != 0.0 {
            axpy(rh, &p.recurrent[k * g3 + 2 * u..(k + 1) * g3], cand);
        }
    }
    for j in 0..u {
        cand[j] = cand[j].tanh();
        let z = zr[j];
        h_out[j] = (1.0 - z) * h[j] + z * cand[j];
    }
}

/// `gates` receives the post-activation `[i, f, g, o]`.
fn lstm_step(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    p: &CellParams<'_>,
    gates: &mut [f64],
    h_out: &mut [f64],
    c_out: &mut [f64],
) {
    let u = h.len();
    let g4 = 4 * u;
    affine_rows(p.bias, x, p.kernel, gates);
    for (k, hk) in h.iter().enumerate() {
        if *hk != 0.0 {
            axpy(*hk, &p.recurrent[k * g4..(k + 1) * g4], gates);
        }
    }
    for j in 0..u {
        let i = sigmoid(gates[j]);
        let f = sigmoid(gates[u + j]);
        let g = gates[2 * u + j].tanh();
        let o = sigmoid(gates[3 * u + j]);
        gates[j] = i;
        gates[u + j] = f;
        gates[2 * u + j] = g;
        gates[3 * u + j] = o;
        c_out[j] = f * c[j] + i * g;
        h_out[j] = o * c_out[j].tanh();
    }
}

/// Activations of one layer over a sequence, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct SeqCache {
    pub steps: usize,
    pub units: usize,
    /// `(steps + 1) x units`; row 0 is the initial zero state.
    pub hs: Vec<f64>,
    /// LSTM only: `(steps + 1) x units` cell states.
    pub cs: Vec<f64>,
    /// `steps x G*units` post-activation gates.
    pub gates: Vec<f64>,
}

impl SeqCache {
    pub fn h(&self, t: usize) -> &[f64] {
        &self.hs[t * self.units..(t + 1) * self.units]
    }

    /// Outputs for steps `0..steps` as one contiguous `steps x units` slice.
    pub fn outputs(&self) -> &[f64] {
        &self.hs[self.units..]
    }

    pub fn last(&self) -> &[f64] {
        self.h(self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrentLayer {
    pub kind: CellKind,
    pub input: usize,
    pub units: usize,
}

impl RecurrentLayer {
    pub fn kernel_len(&self) -> usize {
        self.input * self.kind.gates() * self.units
    }

    pub fn recurrent_len(&self) -> usize {
        self.units * self.kind.gates() * self.units
    }

    pub fn bias_len(&self) -> usize {
        self.kind.gates() * self.units
    }

    pub fn param_count(&self) -> usize {
        self.kernel_len() + self.recurrent_len() + self.bias_len()
    }

    /// Runs the layer over `xs` (`steps x input`) from a zero state.
    pub fn forward_seq(&self, p: &CellParams<'_>, xs: &[f64]) -> SeqCache {
        let (d, u) = (self.input, self.units);
        let steps = xs.len() / d;
        let g = self.kind.gates() * u;
        let mut hs = vec![0.0; (steps + 1) * u];
        let mut cs = match self.kind {
            CellKind::Lstm => vec![0.0; (steps + 1) * u],
            CellKind::Gru => Vec::new(),
        };
        let mut gates = vec![0.0; steps * g];
        for t in 0..steps {
            let x = &xs[t * d..(t + 1) * d];
            let (prev, next) = hs.split_at_mut((t + 1) * u);
            let h_prev = &prev[t * u..];
            let h_out = &mut next[..u];
            let gt = &mut gates[t * g..(t + 1) * g];
            match self.kind {
                CellKind::Gru => gru_step(x, h_prev, p, gt, h_out),
                CellKind::Lstm => {
                    let (cprev, cnext) = cs.split_at_mut((t + 1) * u);
                    lstm_step(x, h_prev, &cprev[t * u..], p, gt, h_out, &mut cnext[..u]);
                }
            }
        }
        SeqCache { steps, units: u, hs, cs, gates }
    }

    /// Backpropagates `dhs` (`steps x units`, gradient w.r.t. each step's
    /// output) through time. Accumulates parameter gradients into `grads`
    /// and returns the gradient w.r.t. `xs`.
    pub fn backward_seq(
        &self,
        p: &CellParams<'_>,
        cache: &SeqCache,
        xs: &[f64],
        dhs: &[f64],
        grads: &mut CellGrads<'_>,
    ) -> Vec<f64> {
        let (d, u) = (self.input, self.units);
        let g = self.kind.gates() * u;
        let steps = cache.steps;
        let mut dxs = vec![0.0; steps * d];
        let mut dh = vec![0.0; u];
        let mut dc = vec![0.0; u];
        let mut dh_prev = vec![0.0; u];
        let mut da = vec![0.0; g];
        let mut rh = vec![0.0; u];
        for t in (0..steps).rev() {
            for j in 0..u {
                dh[j] += dhs[t * u + j];
            }
            let x = &xs[t * d..(t + 1) * d];
            let hp = cache.h(t);
            let gt = &cache.gates[t * g..(t + 1) * g];
            match self.kind {
                CellKind::Gru => {
                    let (z, r, hc) = (&gt[..u], &gt[u..2 * u], &gt[2 * u..]);
                    for j in 0..u {
                        da[j] = dh[j] * (hc[j] - hp[j]) * z[j] * (1.0 - z[j]);
                        da[2 * u + j] = dh[j] * z[j] * (1.0 - hc[j] * hc[j]);
                    }
                    for k in 0..u {
                        let row = &p.recurrent[k * g..(k + 1) * g];
                        let d_rh = dot(&row[2 * u..], &da[2 * u..]);
                        da[u + k] = d_rh * hp[k] * r[k] * (1.0 - r[k]);
                        dh_prev[k] = dh[k] * (1.0 - z[k]) + d_rh * r[k];
                        rh[k] = r[k] * hp[k];
                    }
                    for k in 0..u {
                        let row = &p.recurrent[k * g..(k + 1) * g];
                        dh_prev[k] += dot(&row[..2 * u], &da[..2 * u]);
                        let grow = &mut grads.recurrent[k * g..(k + 1) * g];
                        axpy(hp[k], &da[..2 * u], &mut grow[..2 * u]);
                        axpy(rh[k], &da[2 * u..], &mut grow[2 * u..]);
                    }
                }
                CellKind::Lstm => {
                    let (i, f, gg, o) = (&gt[..u], &gt[u..2 * u], &gt[2 * u..3 * u], &gt[3 * u..]);
                    let c = &cache.cs[(t + 1) * u..(t + 2) * u];
                    let cp = &cache.cs[t * u..(t + 1) * u];
                    for j in 0..u {
                        let tc = c[j].tanh();
                        let dct = dc[j] + dh[j] * o[j] * (1.0 - tc * tc);
                        da[j] = dct * gg[j] * i[j] * (1.0 - i[j]);
                        da[u + j] = dct * cp[j] * f[j] * (1.0 - f[j]);
                        da[2 * u + j] = dct * i[j] * (1.0 - gg[j] * gg[j]);
                        da[3 * u + j] = dh[j] * tc * o[j] * (1.0 - o[j]);
                        dc[j] = dct * f[j];
                    }
                    for k in 0..u {
                        let row = &p.recurrent[k * g..(k + 1) * g];
                        dh_prev[k] = dot(row, &da);
                        axpy(hp[k], &da, &mut grads.recurrent[k * g..(k + 1) * g]);
                    }
                }
            }
            for k in 0..d {
                let row = &p.kernel[k * g..(k + 1) * g];
                dxs[t * d + k] = dot(row, &da);
                axpy(x[k], &da, &mut grads.kernel[k * g..(k + 1) * g]);
            }
            axpy(1.0, &da, grads.bias);
            std::mem::swap(&mut dh, &mut dh_prev);
        }
        dxs
    }
}
