//! Per-mode non-Hermitian Hamiltonian of the counter-rotating rings.
//!
//! Plane waves `A_i e^{i(κx − ωt)}` turn the ring equations into `ωA = HA`
//! with
//!
//! ```text
//! H = [ −i(κ²D + h_c) + κv      i h_c               ]
//!     [  i h_c                 −i(κ²D + h_c) − κv   ]
//! ```
//!
//! Decay means `Im ω < 0`. The eigenvalues are
//! `ω± = −i[(κ²D + h_c) ± √(h_c² − κ²v²)]`; they coalesce at `v = h_c/|κ|`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fmt::sci;
use crate::params::Transport;
use crate::{Error, Result};

/// Relative width of the EXCEPTIONAL band, in units of h_c².
pub const EP_REL_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeHamiltonian {
    pub entries: Matrix2,
    pub kappa: f64,
    pub v: f64,
    pub transport: Transport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// v < v_EP: purely imaginary ω, standing profiles.
    Static,
    Exceptional,
    /// v > v_EP: ω with opposite real parts, travelling profiles.
    Moving,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Static => "STATIC",
            Phase::Exceptional => "EXCEPTIONAL",
            Phase::Moving => "MOVING",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenReport {
    pub omega_plus: Complex64,
    pub omega_minus: Complex64,
    /// Unit eigenvectors for `omega_plus` and `omega_minus`.
    pub eigvecs: [[Complex64; 2]; 2],
    /// h_c² − κ²v² [1/s²]
    pub discriminant: f64,
    pub phase: Phase,
}

impl EigenReport {
    /// Principal angle between the two eigenvectors; zero when they coalesce.
    pub fn coalescence_angle(&self) -> f64 {
        principal_angle(&self.eigvecs[0], &self.eigvecs[1])
    }
}

pub fn build_hamiltonian(kappa: f64, v: f64, transport: &Transport) -> ModeHamiltonian {
    let decay = transport.mode_decay(kappa);
    let advection = kappa * v;
    let coupling = I * transport.coupling;
    let entries = [
        [Complex64::new(advection, -decay), coupling],
        [coupling, Complex64::new(-advection, -decay)],
    ];
    ModeHamiltonian {
        entries,
        kappa,
        v,
        transport: *transport,
    }
}

impl ModeHamiltonian {
    /// h_c² − κ²v²
    pub fn discriminant(&self) -> f64 {
        let hc = self.transport.coupling;
        let kv = self.kappa * self.v;
        hc * hc - kv * kv
    }

    /// M = H + i(κ²D + h_c)·Id, the traceless part. Nilpotent at the EP.
    pub fn traceless_part(&self) -> Matrix2 {
        let shift = I * self.transport.mode_decay(self.kappa);
        let mut m = self.entries;
        m[0][0] += shift;
        m[1][1] += shift;
        m
    }

    /// ‖(σx H σx)* + H‖_F; zero for an anti-PT-symmetric matrix.
    pub fn apt_residual(&self) -> f64 {
        let h = &self.entries;
        let swapped = [[h[1][1], h[1][0]], [h[0][1], h[0][0]]];
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                acc += (swapped[r][c].conj() + h[r][c]).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

pub fn classify(discriminant: f64, coupling: f64) -> Phase {
    if discriminant.abs() <= EP_REL_TOL * coupling * coupling {
        Phase::Exceptional
    } else if discriminant > 0.0 {
        Phase::Static
    } else {
        Phase::Moving
    }
}

/// Closed-form eigenfrequencies, unit eigenvectors and phase tag.
pub fn eigenfrequencies(h: &ModeHamiltonian) -> EigenReport {
    let decay = h.transport.mode_decay(h.kappa);
    let disc = h.discriminant();
    let phase = classify(disc, h.transport.coupling);
    // √disc on the branch that keeps Re ω₊ ≥ 0 in the moving phase.
    let root = if disc >= 0.0 {
        Complex64::new(disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-disc).sqrt())
    };
    let omega_plus = -I * (decay + root);
    let omega_minus = -I * (decay - root);
    let eigvecs = [
        eigenvector(&h.entries, omega_plus),
        eigenvector(&h.entries, omega_minus),
    ];
    EigenReport {
        omega_plus,
        omega_minus,
        eigvecs,
        discriminant: disc,
        phase,
    }
}

/// Eigenvalues from the characteristic polynomial ω² − tr·ω + det = 0,
/// without using the structure of H.
pub fn eigenvalues_direct(m: &Matrix2) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let sq = (tr * tr - 4.0 * det).sqrt();
    [(tr + sq) * 0.5, (tr - sq) * 0.5]
}

fn eigenvector(m: &Matrix2, omega: Complex64) -> [Complex64; 2] {
    // Rows of (H − ωI) annihilate the eigenvector; take the better
    // conditioned of the two candidates.
    let a = [m[0][1], omega - m[0][0]];
    let b = [omega - m[1][1], m[1][0]];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    let (v, norm) = if na >= nb { (a, na) } else { (b, nb) };
    if norm == 0.0 {
        // H − ωI vanishes: H is already diagonal with a double eigenvalue.
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let s = norm.sqrt();
    [v[0] / s, v[1] / s]
}

/// Angle between the complex lines spanned by two unit 2-vectors.
pub fn principal_angle(u: &[Complex64; 2], w: &[Complex64; 2]) -> f64 {
    let inner = (u[0].conj() * w[0] + u[1].conj() * w[1]).norm();
    let wedge = (u[0] * w[1] - u[1] * w[0]).norm();
    wedge.atan2(inner)
}

/// Locates the EP speed by bisection on the sign of h_c² − κ²v².
pub fn find_ep(kappa: f64, transport: &Transport, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Search(format!("degenerate bracket [{lo}, {hi}]")));
    }
    let hc = transport.coupling;
    let disc = |v: f64| hc * hc - kappa * kappa * v * v;
    let (mut f_lo, f_hi) = (disc(lo), disc(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Search(format!(
            "discriminant does not change sign on [{lo}, {hi}]"
        )));
    }
    let target = 1e-12 * hc * hc;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = disc(mid);
        if f_mid.abs() < target || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    pub v: f64,
    pub report: EigenReport,
}

/// Eigen reports on `steps` equally spaced speeds from `v_min` to `v_max`.
pub fn sweep_spectrum(
    kappa: f64,
    transport: &Transport,
    v_min: f64,
    v_max: f64,
    steps: usize,
) -> Result<Vec<SpectrumSample>> {
    if steps < 2 {
        return Err(Error::domain(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(v_min.is_finite() && v_max.is_finite()) {
        return Err(Error::domain("sweep bounds must be finite"));
    }
    let span = v_max - v_min;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .into_par_iter()
        .map(|i| {
            let v = v_min + span * i as f64 / last;
            let report = eigenfrequencies(&build_hamiltonian(kappa, v, transport));
            SpectrumSample { v, report }
        })
        .collect())
}

pub const SPECTRUM_CSV_HEADER: &str =
    "v_mm_per_s,re_omega_plus,im_omega_plus,re_omega_minus,im_omega_minus,phase";

pub fn spectrum_csv(samples: &[SpectrumSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 128);
    out.push_str(SPECTRUM_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let r = &s.report;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sci(s.v),
            sci(r.omega_plus.re),
            sci(r.omega_plus.im),
            sci(r.omega_minus.re),
            sci(r.omega_minus.im),
            r.phase
        ));
    }
    out
}
