use rand::Rng;
use rand_distr::StandardNormal;

use crate::sim::SimRng;

/// Grid spacing of the sampled field, metres.
const SPACING_M: f64 = 1.0;

/// Log-normal shadowing along a UE's travelled distance.
///
/// Gauss-Markov samples on a 1 m grid with autocorrelation
/// `sigma^2 * exp(-d / decorrelation_m)`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowField {
    values: Vec<f64>,
}

impl ShadowField {
    pub fn generate(rng: &mut SimRng, sigma_db: f64, decorrelation_m: f64, length_m: f64) -> Self {
        let n = (length_m / SPACING_M).ceil().max(0.0) as usize + 2;
        let rho = (-SPACING_M / decorrelation_m).exp();
        let innovation = (1.0 - rho * rho).sqrt() * sigma_db;
        let mut values = Vec::with_capacity(n);
        let first: f64 = rng.sample(StandardNormal);
        values.push(first * sigma_db);
        for i in 1..n {
            let e: f64 = rng.sample(StandardNormal);
            values.push(rho * values[i - 1] + innovation * e);
        }
        Self { values }
    }

    pub fn zero() -> Self {
        Self { values: vec![0.0] }
    }

    pub fn value_at(&self, s_m: f64) -> f64 {
        let x = (s_m / SPACING_M).max(0.0);
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }
}
