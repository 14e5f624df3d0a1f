//! Exact time evolution of the ring equations by Fourier decomposition.
//!
//! Each ring harmonic `n` obeys `d/dt (a1, a2) = G (a1, a2)` with
//! `G = −i H(κ, v1, v2)` and
//!
//! ```text
//! H = [ −i(κ²D + h_c) + κ v1     i h_c                ]
//!     [  i h_c                  −i(κ²D + h_c) − κ v2  ]
//! ```
//!
//! Writing `G = μ Id + M` with `μ = tr G / 2`, the traceless part satisfies
//! `M² = (h_c² − κ² v̄²) Id`, `v̄ = (v1 + v2)/2`. Away from the exceptional
//! point `exp(Mt)` is assembled from the two spectral projectors of `M`; at
//! the EP `M` is nilpotent and `exp(Mt) = Id + M t` exactly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft;
use crate::field::{FieldState, Grid, SnapshotSink};
use crate::params::{RingSpeeds, Transport};
use crate::spectrum::Matrix2;
use crate::{Error, Result};

/// Relative band (in units of h_c²) of |h_c² − κ²v̄²| on which the Jordan
/// form is used instead of the projector form.
pub const JORDAN_REL_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex amplitudes of one harmonic in rings 1 and 2 [K].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAmplitude {
    pub ring1: Complex64,
    pub ring2: Complex64,
}

impl ModeAmplitude {
    pub fn new(ring1: Complex64, ring2: Complex64) -> Self {
        Self { ring1, ring2 }
    }

    pub fn apply(&self, m: &Matrix2) -> Self {
        Self {
            ring1: m[0][0] * self.ring1 + m[0][1] * self.ring2,
            ring2: m[1][0] * self.ring1 + m[1][1] * self.ring2,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.ring1.norm_sqr() + self.ring2.norm_sqr()).sqrt()
    }
}

/// Fourier coefficients of both rings, in DFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpectrum {
    pub grid: Grid,
    pub modes: Vec<ModeAmplitude>,
    pub time: f64,
    pub reference_temp: f64,
}

impl FieldSpectrum {
    pub fn mode(&self, n: i64) -> Option<ModeAmplitude> {
        dft::bin_of(n, self.grid.len()).map(|k| self.modes[k])
    }
}

pub fn decompose(field: &FieldState) -> Result<FieldSpectrum> {
    let len = field.grid.len();
    if field.t1.len() != len || field.t2.len() != len {
        return Err(Error::Shape(format!(
            "ring arrays have lengths {} and {}, grid has {len}",
            field.t1.len(),
            field.t2.len()
        )));
    }
    let a1 = dft::forward_real(&field.t1);
    let a2 = dft::forward_real(&field.t2);
    Ok(FieldSpectrum {
        grid: field.grid,
        modes: a1.into_iter().zip(a2).map(|(r1, r2)| ModeAmplitude::new(r1, r2)).collect(),
        time: field.time,
        reference_temp: field.reference_temp,
    })
}

/// Recomposes the field and returns the largest imaginary residue seen
/// before it was discarded.
pub fn compose_with_residue(spectrum: &FieldSpectrum) -> (FieldState, f64) {
    let a1: Vec<Complex64> = spectrum.modes.iter().map(|m| m.ring1).collect();
    let a2: Vec<Complex64> = spectrum.modes.iter().map(|m| m.ring2).collect();
    let x1 = dft::inverse(&a1);
    let x2 = dft::inverse(&a2);
    let residue = x1.iter().chain(&x2).fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let state = FieldState {
        grid: spectrum.grid,
        t1: x1.iter().map(|z| z.re).collect(),
        t2: x2.iter().map(|z| z.re).collect(),
        time: spectrum.time,
        reference_temp: spectrum.reference_temp,
    };
    (state, residue)
}

pub fn compose(spectrum: &FieldSpectrum) -> FieldState {
    compose_with_residue(spectrum).0
}

/// H(κ, v1, v2) with independent advection of the two rings.
pub fn mode_hamiltonian(kappa: f64, speeds: RingSpeeds, transport: &Transport) -> Matrix2 {
    let decay = transport.mode_decay(kappa);
    let coupling = I * transport.coupling;
    [
        [Complex64::new(kappa * speeds.v1, -decay), coupling],
        [coupling, Complex64::new(-kappa * speeds.v2, -decay)],
    ]
}

/// G = −iH, the generator of `d/dt a = G a`.
pub fn mode_generator(kappa: f64, speeds: RingSpeeds, transport: &Transport) -> Matrix2 {
    let h = mode_hamiltonian(kappa, speeds, transport);
    [[-I * h[0][0], -I * h[0][1]], [-I * h[1][0], -I * h[1][1]]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorPath {
    /// e^{μt}(Id + M t), used at the exceptional point.
    Jordan,
    /// e^{μt}(e^{st} P₊ + e^{−st} P₋)
    Projector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator {
    pub matrix: Matrix2,
    pub path: PropagatorPath,
    /// h_c² − κ² v̄²
    pub discriminant: f64,
}

/// exp(G·dt) for the harmonic with wavenumber `kappa`.
pub fn mode_propagator(
    kappa: f64,
    speeds: RingSpeeds,
    transport: &Transport,
    dt: f64,
) -> ModePropagator {
    let hc = transport.coupling;
    let kv = kappa * speeds.mean();
    let disc = hc * hc - kv * kv;
    let path = if disc.abs() <= JORDAN_REL_TOL * hc * hc {
        PropagatorPath::Jordan
    } else {
        PropagatorPath::Projector
    };
    mode_propagator_via(kappa, speeds, transport, dt, path)
}

/// Same as [`mode_propagator`] with the evaluation path forced. The
/// projector path is undefined exactly at the EP (it divides by √disc).
pub fn mode_propagator_via(
    kappa: f64,
    speeds: RingSpeeds,
    transport: &Transport,
    dt: f64,
    path: PropagatorPath,
) -> ModePropagator {
    let hc = transport.coupling;
    let kv = kappa * speeds.mean();
    let disc = hc * hc - kv * kv;
    let g = mode_generator(kappa, speeds, transport);
    let mu = (g[0][0] + g[1][1]) * 0.5;
    let m = [[g[0][0] - mu, g[0][1]], [g[1][0], g[1][1] - mu]];
    let growth = (mu * dt).exp();
    let exp_m = match path {
        PropagatorPath::Jordan => [
            [ONE + m[0][0] * dt, m[0][1] * dt],
            [m[1][0] * dt, ONE + m[1][1] * dt],
        ],
        PropagatorPath::Projector => {
            let s = if disc >= 0.0 {
                Complex64::new(disc.sqrt(), 0.0)
            } else {
                Complex64::new(0.0, (-disc).sqrt())
            };
            let (ep, em) = ((s * dt).exp(), (-s * dt).exp());
            let inv2s = 0.5 / s;
            // P± = (s Id ± M)/(2s)
            let mut out = [[ZERO; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { s } else { ZERO };
                    let p_plus = (id + m[r][c]) * inv2s;
                    let p_minus = (id - m[r][c]) * inv2s;
                    out[r][c] = ep * p_plus + em * p_minus;
                }
            }
            out
        }
    };
    let mut matrix = exp_m;
    for row in matrix.iter_mut() {
        for x in row.iter_mut() {
            *x *= growth;
        }
    }
    ModePropagator {
        matrix,
        path,
        discriminant: disc,
    }
}

/// Advances one harmonic `n` on a ring of radius `radius` by `dt`.
pub fn evolve_mode(
    amp: ModeAmplitude,
    n: i64,
    speeds: RingSpeeds,
    transport: &Transport,
    radius: f64,
    dt: f64,
) -> Result<ModeAmplitude> {
    if !(dt >= 0.0) {
        return Err(Error::domain(format!("time step must be non-negative, got {dt}")));
    }
    let kappa = n as f64 / radius;
    Ok(amp.apply(&mode_propagator(kappa, speeds, transport, dt).matrix))
}

/// Exact solution at `t_end` of the linear ring equations starting from
/// `field`.
pub fn evolve(
    field: &FieldState,
    t_end: f64,
    speeds: RingSpeeds,
    transport: &Transport,
) -> Result<FieldState> {
    let dt = t_end - field.time;
    if !(dt >= 0.0) {
        return Err(Error::domain(format!(
            "cannot evolve backwards from t = {} to t = {t_end}",
            field.time
        )));
    }
    if dt == 0.0 {
        return Ok(field.clone());
    }
    let mut spectrum = decompose(field)?;
    let len = spectrum.grid.len();
    let radius = spectrum.grid.radius();
    spectrum.modes = spectrum
        .modes
        .par_iter()
        .enumerate()
        .map(|(k, amp)| {
            let n = dft::mode_number(k, len);
            let kappa = n as f64 / radius;
            let forward = amp.apply(&mode_propagator(kappa, speeds, transport, dt).matrix);
            if len % 2 == 0 && 2 * k == len {
                // The Nyquist bin stands for both ±N/2; average the two
                // evolutions so the recomposed field stays real.
                let mirrored = amp.apply(&mode_propagator(-kappa, speeds, transport, dt).matrix);
                ModeAmplitude::new(
                    (forward.ring1 + mirrored.ring1) * 0.5,
                    (forward.ring2 + mirrored.ring2) * 0.5,
                )
            } else {
                forward
            }
        })
        .collect();
    spectrum.time = t_end;
    Ok(compose(&spectrum))
}

/// Exact snapshots at `frames + 1` evenly spaced times from `field.time`
/// to `t_end`, each evolved directly from `field`.
pub fn evolve_frames<S: SnapshotSink + ?Sized>(
    field: &FieldState,
    t_end: f64,
    frames: usize,
    speeds: RingSpeeds,
    transport: &Transport,
    sink: &mut S,
) -> Result<FieldState> {
    if frames == 0 {
        return Err(Error::domain("need at least one frame"));
    }
    let span = t_end - field.time;
    if !(span > 0.0) {
        return Err(Error::domain(format!(
            "t_end = {t_end} must lie after the initial time {}",
            field.time
        )));
    }
    sink.accept(0, field)?;
    let mut last = field.clone();
    for k in 1..=frames {
        let t = field.time + span * k as f64 / frames as f64;
        last = evolve(field, t, speeds, transport)?;
        sink.accept(k, &last)?;
    }
    Ok(last)
}

/// Translates both rings by `s` mm along the ring: `T(x) → T(x − s)`,
/// with band-limited (Fourier) interpolation.
pub fn shift(field: &FieldState, s: f64) -> Result<FieldState> {
    let mut spectrum = decompose(field)?;
    let len = spectrum.grid.len();
    let radius = spectrum.grid.radius();
    for (k, amp) in spectrum.modes.iter_mut().enumerate() {
        let kappa = dft::mode_number(k, len) as f64 / radius;
        let factor = if len % 2 == 0 && 2 * k == len {
            Complex64::new((kappa * s).cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, -kappa * s)
        };
        amp.ring1 *= factor;
        amp.ring2 *= factor;
    }
    Ok(compose(&spectrum))
}

/// Real field whose only content is harmonic `±n` with amplitude `amp` on
/// `+n` (and its conjugate on `−n`).
pub fn field_from_mode(grid: Grid, n: i64, amp: ModeAmplitude, time: f64) -> Result<FieldState> {
    let k = dft::bin_of(n, grid.len())
        .ok_or_else(|| Error::domain(format!("mode {n} not representable on {} points", grid.len())))?;
    let kn = dft::bin_of(-n, grid.len())
        .ok_or_else(|| Error::domain(format!("mode {} not representable", -n)))?;
    if n == 0 || k == kn {
        return Err(Error::domain("mode must be nonzero and below Nyquist"));
    }
    let mut modes = vec![ModeAmplitude::new(ZERO, ZERO); grid.len()];
    modes[k] = amp;
    modes[kn] = ModeAmplitude::new(amp.ring1.conj(), amp.ring2.conj());
    Ok(compose(&FieldSpectrum {
        grid,
        modes,
        time,
        reference_temp: 0.0,
    }))
}
