//! First-order optimizers over a flat parameter vector.

use super::config::OptimizerKind;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;
pub const RMSPROP_RHO: f64 = 0.9;
pub const RMSPROP_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    pub s: Vec<f64>,
}

impl RmsPropState {
    pub fn new(n: usize) -> Self {
        Self { s: vec![0.0; n] }
    }
}

/// Adam with bias correction.
pub fn step_adam(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) {
    state.t += 1;
    let c1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
    let c2 = 1.0 - ADAM_BETA2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g;
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

pub fn step_rmsprop(params: &mut [f64], grads: &[f64], state: &mut RmsPropState, lr: f64) {
    for i in 0..params.len() {
        let g = grads[i];
        state.s[i] = RMSPROP_RHO * state.s[i] + (1.0 - RMSPROP_RHO) * g * g;
        params[i] -= lr * g / (state.s[i].sqrt() + RMSPROP_EPS);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam(AdamState),
    RmsProp(RmsPropState),
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n: usize) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam(AdamState::new(n)),
            OptimizerKind::Rmsprop => Optimizer::RmsProp(RmsPropState::new(n)),
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        match self {
            Optimizer::Adam(s) => step_adam(params, grads, s, lr),
            Optimizer::RmsProp(s) => step_rmsprop(params, grads, s, lr),
        }
    }
}
