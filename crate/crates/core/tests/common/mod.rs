#![allow(dead_code)]

use aptring_core::spectrum::Matrix2;
use aptring_core::{FieldState, PhysicalParams};
use aptring_core::params::Transport;
use num_complex::Complex64;

pub fn paper() -> Transport {
    PhysicalParams::paper().transport()
}

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let z = Complex64::new(0.0, 0.0);
    let mut out = [[z; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn norm(a: &Matrix2) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// e^{A} by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &Matrix2) -> Matrix2 {
    let squarings = norm(a).log2().ceil().max(0.0) as i32 + 4;
    let scale = 0.5_f64.powi(squarings);
    let b: Matrix2 = a.map(|row| row.map(|z| z * scale));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut sum = [[one, zero], [zero, one]];
    let mut term = sum;
    for k in 1..30 {
        term = mul(&term, &b).map(|row| row.map(|z| z / k as f64));
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

pub fn scaled(a: &Matrix2, s: f64) -> Matrix2 {
    a.map(|row| row.map(|z| z * s))
}

pub fn diff(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut d = *a;
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] -= b[i][j];
        }
    }
    norm(&d)
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn field_linf(a: &FieldState, b: &FieldState) -> f64 {
    linf(&a.t1, &b.t1).max(linf(&a.t2, &b.t2))
}
