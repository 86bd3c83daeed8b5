//! Small dense kernels. Reductions use a fixed 4-way split so results are
//! reproducible regardless of platform.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out[j] = bias[j] + sum_k x[k] * m[k][j]` for a row-major `x.len() x out.len()` matrix.
#[inline]
pub fn affine_rows(bias: &[f64], x: &[f64], m: &[f64], out: &mut [f64]) {
    let n = out.len();
    out.copy_from_slice(bias);
    for (k, xk) in x.iter().enumerate() {
        if *xk != 0.0 {
            axpy(*xk, &m[k * n..(k + 1) * n], out);
        }
    }
}
