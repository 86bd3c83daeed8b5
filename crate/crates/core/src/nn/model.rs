use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cells::{CellGrads, CellParams, RecurrentLayer, SeqCache};
use super::config::ModelConfig;
use super::linalg::{axpy, dot};
use super::NnError;
use crate::sim::{rng_stream, SimRng};

/// Min–max normalization to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub fn new(min: f64, max: f64) -> Result<Self, NnError> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(NnError::InvalidConfig(format!("scaler needs min < max, got [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    /// Fits to the range of `values`. A degenerate range is widened by 0.5
    /// on each side.
    pub fn fit(values: &[f64]) -> Result<Self, NnError> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(NnError::DatasetTooSmall { need: 1, got: 0 });
        }
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self::new(lo, hi)
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

impl Default for Scaler {
    fn default() -> Self {
        Self { min: 0.0, max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerOffsets {
    kernel: usize,
    recurrent: usize,
    bias: usize,
    end: usize,
}

/// A stack of recurrent layers with a single-output dense head.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentModel {
    config: ModelConfig,
    scaler: Scaler,
    layers: Vec<RecurrentLayer>,
    offsets: Vec<LayerOffsets>,
    dense: usize,
    params: Vec<f64>,
}

/// Named parameter blocks in storage order, with their shapes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl RecurrentModel {
    /// Builds a model with seeded uniform(±1/√fan_in) weights and zero biases.
    pub fn new(config: ModelConfig) -> Result<Self, NnError> {
        let mut model = Self::zeroed(config)?;
        let mut rng = rng_stream("nn/init", model.config.seed);
        for (layer, off) in model.layers.iter().zip(&model.offsets) {
            let a = 1.0 / (layer.input as f64).sqrt();
            for w in &mut model.params[off.kernel..off.recurrent] {
                *w = rng.random_range(-a..a);
            }
            let a = 1.0 / (layer.units as f64).sqrt();
            for w in &mut model.params[off.recurrent..off.bias] {
                *w = rng.random_range(-a..a);
            }
        }
        let top = *model.config.units.last().expect("validated");
        let a = 1.0 / (top as f64).sqrt();
        let dense = model.dense;
        for w in &mut model.params[dense..dense + top] {
            *w = rng.random_range(-a..a);
        }
        Ok(model)
    }

    /// Builds a model with every parameter zero.
    pub fn zeroed(config: ModelConfig) -> Result<Self, NnError> {
        config.validate()?;
        let mut layers = Vec::with_capacity(config.units.len());
        let mut offsets = Vec::with_capacity(config.units.len());
        let mut input = 1;
        let mut at = 0;
        for &units in &config.units {
            let layer = RecurrentLayer { kind: config.arch, input, units };
            let off = LayerOffsets {
                kernel: at,
                recurrent: at + layer.kernel_len(),
                bias: at + layer.kernel_len() + layer.recurrent_len(),
                end: at + layer.param_count(),
            };
            at = off.end;
            input = units;
            layers.push(layer);
            offsets.push(off);
        }
        let dense = at;
        let params = vec![0.0; dense + input + 1];
        Ok(Self { config, scaler: Scaler::default(), layers, offsets, dense, params })
    }

    /// Rebuilds a model from a flat parameter vector.
    pub fn from_parts(config: ModelConfig, scaler: Scaler, params: Vec<f64>) -> Result<Self, NnError> {
        let mut model = Self::zeroed(config)?;
        if params.len() != model.params.len() {
            return Err(NnError::Shape(format!("expected {} weights, got {}", model.params.len(), params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NnError::Format("non-finite weight".into()));
        }
        model.scaler = Scaler::new(scaler.min, scaler.max)?;
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn scaler(&self) -> Scaler {
        self.scaler
    }

    pub fn set_scaler(&mut self, scaler: Scaler) {
        self.scaler = scaler;
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layers(&self) -> &[RecurrentLayer] {
        &self.layers
    }

    pub fn layout(&self) -> Vec<TensorSpec> {
        let mut out = Vec::new();
        let g = self.config.arch.gates();
        for (i, l) in self.layers.iter().enumerate() {
            let t = |n: &str, shape: Vec<usize>| TensorSpec { name: format!("rnn{i}/{n}"), shape };
            out.push(t("kernel", vec![l.input, g * l.units]));
            out.push(t("recurrent_kernel", vec![l.units, g * l.units]));
            out.push(t("bias", vec![g * l.units]));
        }
        let top = self.layers.last().map_or(0, |l| l.units);
        out.push(TensorSpec { name: "dense/kernel".into(), shape: vec![top, 1] });
        out.push(TensorSpec { name: "dense/bias".into(), shape: vec![1] });
        out
    }

    /// Parameter views of recurrent layer `i`.
    pub fn cell_params(&self, i: usize) -> CellParams<'_> {
        let o = self.offsets[i];
        CellParams {
            kernel: &self.params[o.kernel..o.recurrent],
            recurrent: &self.params[o.recurrent..o.bias],
            bias: &self.params[o.bias..o.end],
        }
    }

    fn dense_head(&self) -> (&[f64], f64) {
        let top = self.layers.last().map_or(0, |l| l.units);
        (&self.params[self.dense..self.dense + top], self.params[self.dense + top])
    }

    /// Inference on a normalized window of length `lookback`. Inputs outside
    /// `[0, 1]` are clamped; dropout is never applied. Returns the normalized
    /// prediction.
    pub fn forward(&self, window: &[f64]) -> Result<f64, NnError> {
        if window.len() != self.config.lookback {
            return Err(NnError::Shape(format!("window of {} values, lookback is {}", window.len(), self.config.lookback)));
        }
        let xs: Vec<f64> = window.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(self.forward_raw(&xs))
    }

    fn forward_raw(&self, window: &[f64]) -> f64 {
        let mut input = window.to_vec();
        let n = self.layers.len();
        for (i, layer) in self.layers.iter().enumerate() {
            let cache = layer.forward_seq(&self.cell_params(i), &input);
            input = if i + 1 < n { cache.outputs().to_vec() } else { cache.last().to_vec() };
        }
        let (w, b) = self.dense_head();
        self.config.activation.apply(b + dot(w, &input))
    }

    /// Prediction in dBm from a window in dBm.
    pub fn predict_dbm(&self, window_dbm: &[f64]) -> Result<f64, NnError> {
        let xs: Vec<f64> = window_dbm.iter().map(|v| self.scaler.normalize(*v)).collect();
        Ok(self.scaler.denormalize(self.forward(&xs)?))
    }

    /// Applies the one-step model `n` times, sliding each prediction into
    /// the window. `history` is in dBm; so are the returned values.
    pub fn predict_recursive(&self, history: &[f64], n: usize) -> Result<Vec<f64>, NnError> {
        let lb = self.config.lookback;
        if history.len() < lb {
            return Err(NnError::InsufficientHistory { need: lb, got: history.len() });
        }
        let mut window: Vec<f64> = history[history.len() - lb..].iter().map(|v| self.scaler.normalize(*v)).collect();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let y = self.forward(&window)?;
            out.push(self.scaler.denormalize(y));
            window.remove(0);
            window.push(y);
        }
        Ok(out)
    }

    /// Mean squared error over `samples` and its gradient w.r.t. every
    /// parameter. With `dropout` set, inverted dropout masks are drawn from
    /// it (training mode); otherwise dropout is off.
    pub fn loss_and_grad(&self, samples: &[(&[f64], f64)], dropout: Option<&mut SimRng>) -> (f64, Vec<f64>) {
        let mut grads = vec![0.0; self.params.len()];
        if samples.is_empty() {
            return (0.0, grads);
        }
        let (se, _) = self.accumulate_grad(samples, dropout, &mut grads);
        (se / samples.len() as f64, grads)
    }

    /// Adds the batch-mean MSE gradient into `grads`. Returns the summed
    /// squared and absolute errors of the batch.
    pub(crate) fn accumulate_grad(
        &self,
        samples: &[(&[f64], f64)],
        mut dropout: Option<&mut SimRng>,
        grads: &mut [f64],
    ) -> (f64, f64) {
        let scale = 1.0 / samples.len() as f64;
        let (mut se, mut ae) = (0.0, 0.0);
        for (window, target) in samples {
            let pass = self.forward_train(window, dropout.as_deref_mut());
            let err = pass.y - target;
            se += err * err;
            ae += err.abs();
            self.backward(&pass, window, 2.0 * err * scale, grads);
        }
        (se, ae)
    }

    /// Training-mode forward pass of one window. Also used for metrics.
    pub(crate) fn forward_train(&self, window: &[f64], mut dropout: Option<&mut SimRng>) -> Pass {
        let n = self.layers.len();
        let rate = self.config.dropout;
        let keep = 1.0 / (1.0 - rate);
        let mut inputs = Vec::with_capacity(n + 1);
        let mut caches = Vec::with_capacity(n);
        let mut masks = Vec::with_capacity(n);
        inputs.push(window.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let cache = layer.forward_seq(&self.cell_params(i), &inputs[i]);
            let mut out = if i + 1 < n { cache.outputs().to_vec() } else { cache.last().to_vec() };
            let mask = match dropout.as_deref_mut() {
                Some(rng) if rate > 0.0 => {
                    let m: Vec<f64> =
                        (0..out.len()).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect();
                    for (o, k) in out.iter_mut().zip(&m) {
                        *o *= k;
                    }
                    Some(m)
                }
                _ => None,
            };
            caches.push(cache);
            masks.push(mask);
            inputs.push(out);
        }
        let (w, b) = self.dense_head();
        let pre = b + dot(w, &inputs[n]);
        Pass { inputs, caches, masks, pre, y: self.config.activation.apply(pre) }
    }

    fn backward(&self, pass: &Pass, window: &[f64], dy: f64, grads: &mut [f64]) {
        let n = self.layers.len();
        let dpre = dy * self.config.activation.derivative(pass.pre);
        if dpre == 0.0 {
            return;
        }
        let (w, _) = self.dense_head();
        let top = w.len();
        axpy(dpre, &pass.inputs[n], &mut grads[self.dense..self.dense + top]);
        grads[self.dense + top] += dpre;
        let mut d_out: Vec<f64> = w.iter().map(|wi| dpre * wi).collect();
        for i in (0..n).rev() {
            if let Some(mask) = &pass.masks[i] {
                for (d, m) in d_out.iter_mut().zip(mask) {
                    *d *= m;
                }
            }
            let layer = &self.layers[i];
            let cache = &pass.caches[i];
            let dhs = if i + 1 < n {
                d_out
            } else {
                let mut full = vec![0.0; cache.steps * layer.units];
                full[(cache.steps - 1) * layer.units..].copy_from_slice(&d_out);
                full
            };
            let o = self.offsets[i];
            let (_, rest) = grads.split_at_mut(o.kernel);
            let (gk, rest) = rest.split_at_mut(o.recurrent - o.kernel);
            let (gr, rest) = rest.split_at_mut(o.bias - o.recurrent);
            let gb = &mut rest[..o.end - o.bias];
            let mut cg = CellGrads { kernel: gk, recurrent: gr, bias: gb };
            let xs = if i == 0 { window } else { &pass.inputs[i][..] };
            d_out = layer.backward_seq(&self.cell_params(i), cache, xs, &dhs, &mut cg);
        }
    }
}

pub(crate) struct Pass {
    inputs: Vec<Vec<f64>>,
    caches: Vec<SeqCache>,
    masks: Vec<Option<Vec<f64>>>,
    pre: f64,
    pub y: f64,
}
