#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aptring_core::spectrum::Matrix2;
use num_complex::Complex64;

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_aptring"))
}

/// Runs the binary with `APTRING_OUT` cleared so only explicit flags count.
pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("APTRING_OUT")
        .output()
        .expect("spawn aptring")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("APTRING_OUT")
        .current_dir(dir)
        .output()
        .expect("spawn aptring")
}

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Parses a CSV column by header name, skipping `#` comment lines.
pub fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
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

pub fn square(a: &Matrix2) -> Matrix2 {
    mul(a, a)
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

pub fn diff(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut d = *a;
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] -= b[i][j];
        }
    }
    norm(&d)
}
