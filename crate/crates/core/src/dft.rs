//! Discrete Fourier transform on the periodic ring, evaluated directly from
//! its definition.
//!
//! Bins are stored in the usual order `k = 0..N`, with signed mode number
//! `n = k` for `k < N/2` and `n = k − N` otherwise, so modes cover
//! `[−N/2, N/2)`. Twiddles come from a single table indexed by `(j·k) mod N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

fn twiddles(len: usize, sign: f64) -> Vec<Complex64> {
    (0..len)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
        .collect()
}

fn transform(input: &[Complex64], sign: f64, scale: f64) -> Vec<Complex64> {
    let len = input.len();
    if len == 0 {
        return Vec::new();
    }
    let table = twiddles(len, sign);
    (0..len)
        .into_par_iter()
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for x in input {
                acc += x * table[idx];
                idx += k;
                if idx >= len {
                    idx -= len;
                }
            }
            acc * scale
        })
        .collect()
}

/// Analysis: `a_k = (1/N) Σ_j x_j e^{−2πi jk/N}`.
pub fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / input.len().max(1) as f64;
    transform(input, -1.0, scale)
}

pub fn forward_real(input: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(&c)
}

/// Synthesis: `x_j = Σ_k a_k e^{2πi jk/N}`; inverse of [`forward`].
pub fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    transform(coeffs, 1.0, 1.0)
}

/// Signed mode number of bin `k`.
pub fn mode_number(k: usize, len: usize) -> i64 {
    if 2 * k < len {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

/// Bin holding signed mode `n`, if it is representable on `len` samples.
pub fn bin_of(n: i64, len: usize) -> Option<usize> {
    let l = len as i64;
    if n >= -(l / 2) && n <= (l - 1) / 2 {
        Some(n.rem_euclid(l) as usize)
    } else {
        None
    }
}

/// A single analysis coefficient, O(N).
pub fn mode_coefficient(samples: &[f64], n: i64) -> Complex64 {
    let len = samples.len();
    let l = len as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &x) in samples.iter().enumerate() {
        let idx = ((j as i64 * n).rem_euclid(l)) as f64;
        acc += Complex64::from_polar(x, -2.0 * PI * idx / len as f64);
    }
    acc / len as f64
}

/// `order`-th derivative of a periodic sampled function whose period is
/// `period`. The Nyquist bin is dropped for odd orders.
pub fn spectral_derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let len = samples.len();
    let mut coeffs = forward_real(samples);
    for (k, c) in coeffs.iter_mut().enumerate() {
        let n = mode_number(k, len);
        if len % 2 == 0 && 2 * n.unsigned_abs() == len as u64 && order % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, 2.0 * PI * n as f64 / period);
        *c *= ik.powu(order);
    }
    inverse(&coeffs).into_iter().map(|z| z.re).collect()
}
