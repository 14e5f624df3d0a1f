//! Observables extracted from trajectories: fundamental-mode decay, drift
//! velocity, spatial beat wavenumber, inter-ring phase lag, and solver
//! comparison norms.
//!
//! All estimators work on Fourier modes with `n ≠ 0`, so a common offset T0
//! never enters.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft;
use crate::field::FieldState;
use crate::fmt::sci;
use crate::{Error, Result};

/// Mode magnitudes at or below this are treated as absent.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Fewest samples accepted by the decay and drift fits.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Largest wrapped phase step between consecutive frames before the
/// unwrapping is considered ambiguous.
pub const MAX_PHASE_STEP: f64 = 0.9 * PI;

/// Complex amplitude of mode `n` in each ring, frame by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSeries {
    pub n: i64,
    pub times: Vec<f64>,
    pub ring1: Vec<Complex64>,
    pub ring2: Vec<Complex64>,
}

impl ModeSeries {
    pub fn from_trajectory(trajectory: &[FieldState], n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("mode series needs a nonzero mode"));
        }
        let mut series = Self {
            n,
            times: Vec::with_capacity(trajectory.len()),
            ring1: Vec::with_capacity(trajectory.len()),
            ring2: Vec::with_capacity(trajectory.len()),
        };
        for state in trajectory {
            series.times.push(state.time);
            series.ring1.push(dft::mode_coefficient(&state.t1, n));
            series.ring2.push(dft::mode_coefficient(&state.t2, n));
        }
        Ok(series)
    }

    /// `√(|a1|² + |a2|²)` per frame.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.ring1
            .iter()
            .zip(&self.ring2)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .collect()
    }
}

/// Least-squares line `y ≈ intercept + slope·x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

fn check_fit_input<T>(times: &[f64], values: &[T]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} times but {} samples",
            times.len(),
            values.len()
        )));
    }
    if times.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_SAMPLES} samples, got {}",
            times.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Fit("non-finite sample time".into()));
    }
    Ok(())
}

fn check_magnitudes(magnitudes: &[f64]) -> Result<()> {
    if let Some(m) = magnitudes.iter().find(|m| !(**m > NOISE_FLOOR && m.is_finite())) {
        return Err(Error::Fit(format!(
            "magnitude {m:e} is at or below the noise floor {NOISE_FLOOR:e}"
        )));
    }
    Ok(())
}

/// Exponential decay fitted on log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// s⁻¹, positive for decay
    pub rate: f64,
    /// RMS residual of ln|a| about the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Straight-line fit of `ln m(t)`; `rate = −slope`.
pub fn fit_decay(times: &[f64], magnitudes: &[f64]) -> Result<DecayFit> {
    check_fit_input(times, magnitudes)?;
    check_magnitudes(magnitudes)?;
    let logs: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    let (slope, _, residual) = linear_fit(times, &logs);
    Ok(DecayFit {
        rate: -slope,
        residual,
        samples: times.len(),
    })
}

/// Decay fitted with a secular prefactor:
/// `m(t)² ≈ e^{−2γ(t−t0)}·(c0 + c1 s + c2 s²)`, `s = (t − t0)/span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularFit {
    pub rate: f64,
    /// RMS relative residual of m² about the model.
    pub residual: f64,
    /// Prefactor coefficients in scaled time.
    pub prefactor: [f64; 3],
    pub samples: usize,
}

impl SecularFit {
    /// Size of the time-dependent part of the prefactor relative to c0.
    pub fn secular_strength(&self) -> f64 {
        (self.prefactor[1].abs() + self.prefactor[2].abs()) / self.prefactor[0].abs()
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Weighted quadratic fit of `y` in `s` with weights `1/y²`; returns the
/// coefficients and the RMS relative residual.
fn relative_quadratic_fit(s: &[f64], y: &[f64]) -> Option<([f64; 3], f64)> {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (&si, &yi) in s.iter().zip(y) {
        let w = 1.0 / (yi * yi);
        let basis = [1.0, si, si * si];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += w * basis[r] * basis[c];
            }
            atb[r] += w * basis[r] * yi;
        }
    }
    let c = solve3(ata, atb)?;
    let rms = (s
        .iter()
        .zip(y)
        .map(|(&si, &yi)| ((yi - c[0] - c[1] * si - c[2] * si * si) / yi).powi(2))
        .sum::<f64>()
        / s.len() as f64)
        .sqrt();
    Some((c, rms))
}

/// Minimizes `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits decay rate and a quadratic secular prefactor by variable
/// projection: for each trial rate the prefactor is a linear fit, and the
/// rate minimizing the relative residual is kept.
///
/// The residual has a narrow cusp at the true rate and can have broad
/// shallow minima elsewhere, hence the dense scan before the refinement.
pub fn fit_decay_secular(times: &[f64], magnitudes: &[f64]) -> Result<SecularFit> {
    check_fit_input(times, magnitudes)?;
    check_magnitudes(magnitudes)?;
    let t0 = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t1 = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t1 - t0;
    if !(span > 0.0) {
        return Err(Error::Fit("sample times span no interval".into()));
    }
    let s: Vec<f64> = times.iter().map(|t| (t - t0) / span).collect();
    let log_m2: Vec<f64> = magnitudes.iter().map(|m| 2.0 * m.ln()).collect();
    let project = |gamma: f64| -> Option<([f64; 3], f64)> {
        let y: Vec<f64> = log_m2
            .iter()
            .zip(times)
            .map(|(l, t)| (l + 2.0 * gamma * (t - t0)).exp())
            .collect();
        if y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        relative_quadratic_fit(&s, &y)
    };
    let objective = |gamma: f64| project(gamma).map_or(f64::INFINITY, |(_, r)| r);

    let plain = fit_decay(times, magnitudes)?.rate;
    let half_width = 2.0 * plain.abs().max(1.0 / span);
    let steps = SECULAR_SCAN_STEPS;
    let h = 2.0 * half_width / steps as f64;
    let best = (0..=steps)
        .into_par_iter()
        .map(|k| plain - half_width + k as f64 * h)
        .map(|g| (g, objective(g)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(g, _)| g)
        .unwrap_or(plain);
    let rate = golden_min(objective, best - h, best + h, 1e-13 * (1.0 + best.abs()));
    let (prefactor, residual) =
        project(rate).ok_or_else(|| Error::Fit(format!("secular model degenerate at rate {rate:e}")))?;
    Ok(SecularFit {
        rate,
        residual,
        prefactor,
        samples: times.len(),
    })
}

/// Trial rates in the coarse stage of [`fit_decay_secular`].
pub const SECULAR_SCAN_STEPS: usize = 20_000;

/// Drift speed from the phase of a Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftFit {
    /// mm/s, positive along +x
    pub speed: f64,
    /// RMS residual of the averaged phase about the fitted line [rad].
    pub residual: f64,
    /// Rings that contributed (bit 0: ring 1, bit 1: ring 2).
    pub rings: u8,
    pub samples: usize,
}

fn unwrap_phases(series: &[Complex64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(series.len());
    let mut prev: Option<f64> = None;
    for a in series {
        let raw = a.arg();
        let next = match prev {
            None => raw,
            Some(p) => {
                let step = (raw - p).rem_euclid(2.0 * PI);
                let step = if step > PI { step - 2.0 * PI } else { step };
                if step.abs() > MAX_PHASE_STEP {
                    return Err(Error::Fit(format!(
                        "cadence too coarse: phase jumps by {step:.3} rad between frames"
                    )));
                }
                p + step
            }
        };
        out.push(next);
        prev = Some(next);
    }
    Ok(out)
}

/// Drift of mode `n`: the unwrapped phases of both rings are averaged,
/// regressed against time, and `speed = −R·slope/n`.
///
/// Averaging the two rings removes the opposite phase excursions that a
/// symmetric secular solution picks up, leaving only rigid translation.
/// A ring whose mode stays at the noise floor in some frame is skipped.
pub fn drift_velocity(trajectory: &[FieldState], n: i64) -> Result<DriftFit> {
    let first = trajectory
        .first()
        .ok_or_else(|| Error::Fit("empty trajectory".into()))?;
    let radius = first.grid.radius();
    let series = ModeSeries::from_trajectory(trajectory, n)?;
    check_fit_input(&series.times, &series.ring1)?;
    let mut phase_sum = vec![0.0; series.times.len()];
    let mut rings = 0u8;
    for (bit, ring) in [&series.ring1, &series.ring2].into_iter().enumerate() {
        if ring.iter().all(|a| a.norm() > NOISE_FLOOR) {
            for (acc, p) in phase_sum.iter_mut().zip(unwrap_phases(ring)?) {
                *acc += p;
            }
            rings |= 1 << bit;
        }
    }
    if rings == 0 {
        return Err(Error::Fit(format!("mode {n} is below the noise floor in both rings")));
    }
    let count = f64::from(rings.count_ones());
    let phases: Vec<f64> = phase_sum.iter().map(|p| p / count).collect();
    let (slope, _, residual) = linear_fit(&series.times, &phases);
    Ok(DriftFit {
        speed: -radius * slope / n as f64,
        residual,
        rings,
        samples: phases.len(),
    })
}

/// `arg(a2/a1)` for mode `n`, in (−π, π]. Positive means ring 2 leads.
pub fn phase_lag(state: &FieldState, n: i64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("phase lag needs a nonzero mode"));
    }
    let a1 = dft::mode_coefficient(&state.t1, n);
    let a2 = dft::mode_coefficient(&state.t2, n);
    if a1.norm() <= NOISE_FLOOR || a2.norm() <= NOISE_FLOOR {
        return Err(Error::Fit(format!("mode {n} vanishes in one ring; phase lag undefined")));
    }
    let lag = (a2 / a1).arg();
    Ok(if lag <= -PI { lag + 2.0 * PI } else { lag })
}

/// Phase lag of the exact EP solution started from equal cosines:
/// `2·arctan(h_c t/(1 + h_c t))`, approaching π/2.
pub fn ep_phase_lag(coupling: f64, t: f64) -> f64 {
    let ht = coupling * t;
    2.0 * (ht / (1.0 + ht)).atan()
}

/// 4-term Blackman–Harris window of length `len`.
fn blackman_harris(len: usize) -> Vec<f64> {
    let a = [0.35875, 0.48829, 0.14128, 0.01168];
    let m = (len - 1).max(1) as f64;
    (0..len)
        .map(|j| {
            let u = 2.0 * PI * j as f64 / m;
            a[0] - a[1] * u.cos() + a[2] * (2.0 * u).cos() - a[3] * (3.0 * u).cos()
        })
        .collect()
}

fn dtft_magnitude(signal: &[f64], dz: f64, k: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in signal.iter().enumerate() {
        acc += Complex64::from_polar(*v, -k * j as f64 * dz);
    }
    acc.norm()
}

/// Peaks below this fraction of the strongest one are ignored.
pub const BEAT_PEAK_THRESHOLD: f64 = 1e-3;

/// Separation `|k2 − k1|` (in the profile's own wavenumber units) of the two
/// strongest spectral peaks of a sampled profile, or `None` when the
/// spectrum has a single resolvable peak.
///
/// The profile must span several beat periods for the two peaks to be
/// resolved: the window's main lobe is about `8π/L` wide for a record of
/// length `L`.
pub fn beat_wavenumber(profile: &[f64], dz: f64) -> Result<Option<f64>> {
    if profile.len() < 16 {
        return Err(Error::domain(format!(
            "beat estimate needs at least 16 samples, got {}",
            profile.len()
        )));
    }
    if !(dz > 0.0 && dz.is_finite()) {
        return Err(Error::domain(format!("sample spacing must be positive, got {dz}")));
    }
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    let signal: Vec<f64> = profile
        .iter()
        .zip(blackman_harris(profile.len()))
        .map(|(v, w)| (v - mean) * w)
        .collect();
    let record = profile.len() as f64 * dz;
    let step = PI / record;
    let count = ((PI / dz) / step).floor() as usize;
    let spectrum: Vec<f64> = (0..=count)
        .into_par_iter()
        .map(|i| dtft_magnitude(&signal, dz, i as f64 * step))
        .collect();
    let peak = spectrum.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Ok(None);
    }
    let mut maxima: Vec<(usize, f64)> = (1..spectrum.len().saturating_sub(1))
        .filter(|&i| spectrum[i] >= spectrum[i - 1] && spectrum[i] > spectrum[i + 1])
        .filter(|&i| spectrum[i] >= BEAT_PEAK_THRESHOLD * peak)
        .map(|i| (i, spectrum[i]))
        .collect();
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let Some(&(first, _)) = maxima.first() else {
        return Ok(None);
    };
    // beyond the main lobe of the strongest peak
    let lobe = (8.0 * PI / record / step).ceil() as usize;
    let Some(&(second, _)) = maxima.iter().find(|(i, _)| i.abs_diff(first) > lobe) else {
        return Ok(None);
    };
    let refine = |i: usize| {
        let k = i as f64 * step;
        golden_min(|q| -dtft_magnitude(&signal, dz, q), k - step, k + step, 1e-12 * (1.0 + k))
    };
    Ok(Some((refine(first) - refine(second)).abs()))
}

/// `1 − √(1 − ε²)`: separation of the two spatial frequencies at the EP.
pub fn expected_beat(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("beat needs 0 <= epsilon <= 1, got {epsilon}")));
    }
    Ok(1.0 - (1.0 - epsilon * epsilon).sqrt())
}

/// Difference norms for one ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingNorms {
    /// RMS of the pointwise difference [K]
    pub l2_abs: f64,
    pub linf_abs: f64,
    /// Absolute norms divided by the same norm of the reference deviation.
    pub l2_rel: f64,
    pub linf_rel: f64,
}

/// Pointwise comparison of two snapshots; the second is the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub time: f64,
    pub ring1: RingNorms,
    pub ring2: RingNorms,
}

impl Comparison {
    pub fn max_linf_rel(&self) -> f64 {
        self.ring1.linf_rel.max(self.ring2.linf_rel)
    }

    pub fn max_linf_abs(&self) -> f64 {
        self.ring1.linf_abs.max(self.ring2.linf_abs)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn ring_norms(a: &[f64], a0: f64, b: &[f64], b0: f64) -> RingNorms {
    let n = a.len() as f64;
    let (mut l2, mut linf, mut r2, mut rinf) = (0.0, 0.0_f64, 0.0, 0.0_f64);
    for (x, y) in a.iter().zip(b) {
        let d = (x + a0) - (y + b0);
        l2 += d * d;
        linf = linf.max(d.abs());
        r2 += y * y;
        rinf = rinf.max(y.abs());
    }
    let (l2, r2) = ((l2 / n).sqrt(), (r2 / n).sqrt());
    RingNorms {
        l2_abs: l2,
        linf_abs: linf,
        l2_rel: ratio(l2, r2),
        linf_rel: ratio(linf, rinf),
    }
}

/// Compares absolute temperatures (deviation plus T0) of `a` against the
/// reference `b`. Grids and times must agree.
pub fn compare(a: &FieldState, b: &FieldState) -> Result<Comparison> {
    let (ga, gb) = (&a.grid, &b.grid);
    if ga.len() != gb.len() || (ga.radius() - gb.radius()).abs() > 1e-12 * gb.radius() {
        return Err(Error::Shape(format!(
            "grid mismatch: {} points at R = {} vs {} points at R = {}",
            ga.len(),
            ga.radius(),
            gb.len(),
            gb.radius()
        )));
    }
    if (a.time - b.time).abs() > 1e-9 * a.time.abs().max(b.time.abs()).max(1.0) {
        return Err(Error::Shape(format!("time mismatch: {} s vs {} s", a.time, b.time)));
    }
    Ok(Comparison {
        time: b.time,
        ring1: ring_norms(&a.t1, a.reference_temp, &b.t1, b.reference_temp),
        ring2: ring_norms(&a.t2, a.reference_temp, &b.t2, b.reference_temp),
    })
}

pub const COMPARISON_CSV_HEADER: &str =
    "t_s,ring,l2_abs_K,linf_abs_K,l2_rel,linf_rel";

pub fn comparison_csv(c: &Comparison) -> String {
    let mut out = String::from(COMPARISON_CSV_HEADER);
    out.push('\n');
    for (ring, norms) in [(1, &c.ring1), (2, &c.ring2)] {
        out.push_str(&format!(
            "{},{ring},{},{},{},{}\n",
            sci(c.time),
            sci(norms.l2_abs),
            sci(norms.linf_abs),
            sci(norms.l2_rel),
            sci(norms.linf_rel)
        ));
    }
    out
}

/// Observables of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub solver: String,
    pub n: i64,
    pub t_end: f64,
    pub decay: DecayFit,
    pub secular: SecularFit,
    pub drift: DriftFit,
    /// Beat of the final ring-1 profile in z units, if resolvable.
    pub beat_wavenumber: Option<f64>,
    /// Final phase lag, ring 2 relative to ring 1 [rad].
    pub phase_lag: f64,
}

pub const OBSERVABLES_CSV_HEADER: &str = "solver,t_end_s,decay_rate_per_s,decay_fit_residual,\
secular_decay_rate_per_s,secular_fit_residual,drift_mm_per_s,drift_fit_residual,\
beat_wavenumber_z,phase_lag_rad";

impl ObservableReport {
    pub fn from_trajectory(solver: &str, trajectory: &[FieldState], n: i64) -> Result<Self> {
        let last = trajectory
            .last()
            .ok_or_else(|| Error::Fit("empty trajectory".into()))?;
        let series = ModeSeries::from_trajectory(trajectory, n)?;
        let magnitudes = series.magnitudes();
        let z_step = last.grid.dx() * n.unsigned_abs() as f64 / last.grid.radius();
        Ok(Self {
            solver: solver.to_string(),
            n,
            t_end: last.time,
            decay: fit_decay(&series.times, &magnitudes)?,
            secular: fit_decay_secular(&series.times, &magnitudes)?,
            drift: drift_velocity(trajectory, n)?,
            beat_wavenumber: beat_wavenumber(&last.t1, z_step)?,
            phase_lag: phase_lag(last, n)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.solver,
            sci(self.t_end),
            sci(self.decay.rate),
            sci(self.decay.residual),
            sci(self.secular.rate),
            sci(self.secular.residual),
            sci(self.drift.speed),
            sci(self.drift.residual),
            self.beat_wavenumber.map(sci).unwrap_or_default(),
            sci(self.phase_lag)
        )
    }

    pub fn summary_text(&self) -> String {
        let beat = self
            .beat_wavenumber
            .map_or_else(|| "absent".to_string(), |b| format!("{b:.6} (z units)"));
        format!(
            "solver            {}\n\
             mode n            {}\n\
             t_end             {:.6} s\n\
             decay rate        {:.6} 1/s   (log-linear, rms residual {:.3e})\n\
             secular decay     {:.6} 1/s   (rms rel residual {:.3e}, prefactor strength {:.3e})\n\
             drift velocity    {:.6} mm/s  (rms phase residual {:.3e} rad)\n\
             beat wavenumber   {beat}\n\
             phase lag         {:.6} rad   (positive: ring 2 leads)\n",
            self.solver,
            self.n,
            self.t_end,
            self.decay.rate,
            self.decay.residual,
            self.secular.rate,
            self.secular.residual,
            self.secular.secular_strength(),
            self.drift.speed,
            self.drift.residual,
            self.phase_lag,
        )
    }
}

/// Comment line above the column header.
pub const OBSERVABLES_CSV_NOTE: &str = "# phase_lag_rad = arg(a2/a1) of mode n; positive means ring 2 leads ring 1";

pub fn observables_csv(reports: &[ObservableReport]) -> String {
    let mut out = format!("{OBSERVABLES_CSV_NOTE}\n{OBSERVABLES_CSV_HEADER}");
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn times(count: usize, t_end: f64) -> Vec<f64> {
        (0..count).map(|k| t_end * k as f64 / (count - 1) as f64).collect()
    }

    fn travelling(len: usize, r: f64, frames: usize, speed: f64, rate: f64) -> Vec<FieldState> {
        let grid = Grid::new(len, r).unwrap();
        times(frames, 5.0)
            .into_iter()
            .map(|t| {
                let env = (-rate * t).exp();
                let t1 = grid.points().map(|x| env * ((x - speed * t) / r).cos()).collect();
                let t2 = grid.points().map(|x| env * ((x - speed * t) / r).sin()).collect();
                FieldState::new(grid, t1, t2, t).unwrap()
            })
            .collect()
    }

    #[test]
    fn exact_exponential_rate() {
        let t = times(50, 10.0);
        let m: Vec<f64> = t.iter().map(|t| (-0.4268 * t).exp()).collect();
        let fit = fit_decay(&t, &m).unwrap();
        assert!((fit.rate - 0.4268).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
        let c = fit_decay(&t, &vec![2.0; 50]).unwrap();
        assert!(c.rate.abs() < 1e-14);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let t = times(9, 1.0);
        assert!(matches!(fit_decay(&t, &[1.0; 9]), Err(Error::Fit(_))));
        let t = times(10, 1.0);
        let mut m = vec![1.0; 10];
        m[3] = 0.0;
        assert!(matches!(fit_decay(&t, &m), Err(Error::Fit(_))));
        m[3] = -1.0;
        assert!(matches!(fit_decay(&t, &m), Err(Error::Fit(_))));
    }

    #[test]
    fn secular_prefactor_biases_plain_fit() {
        let gamma = 0.4268;
        let t = times(101, 10.0);
        let mut prev_residual = -1.0;
        for beta in [0.0, 0.1, 0.3, 1.0] {
            let m: Vec<f64> = t.iter().map(|t| (-gamma * t).exp() * (1.0 + beta * t)).collect();
            let plain = fit_decay(&t, &m).unwrap();
            assert!(plain.rate <= gamma + 1e-12);
            assert!(plain.rate >= gamma - beta);
            assert!(plain.residual > prev_residual);
            prev_residual = plain.residual;
            let sec = fit_decay_secular(&t, &m).unwrap();
            // rate and prefactor trade off at third order in the rate error
            assert!((sec.rate - gamma).abs() < 1e-5, "beta {beta}: {}", sec.rate);
            assert!(sec.residual < 1e-10);
        }
    }

    #[test]
    fn secular_fit_on_ep_envelope() {
        let (gamma, hc) = (0.426_757_369_614_512_44, 0.2);
        let t = times(101, 10.0);
        let m: Vec<f64> = t
            .iter()
            .map(|t| (-gamma * t).exp() * ((1.0 + hc * t).powi(2) + (hc * t).powi(2)).sqrt())
            .collect();
        let sec = fit_decay_secular(&t, &m).unwrap();
        assert!((sec.rate - gamma).abs() < 1e-5);
        assert!(sec.secular_strength() > 1.0);
        assert!(fit_decay(&t, &m).unwrap().residual > 1e-2);
    }

    #[test]
    fn static_profile_has_no_drift() {
        let traj = travelling(64, 21.0, 20, 0.0, 0.3);
        let d = drift_velocity(&traj, 1).unwrap();
        assert!(d.speed.abs() < 1e-6);
        assert_eq!(d.rings, 3);
    }

    #[test]
    fn drift_recovers_translation_and_is_galilean() {
        let traj = travelling(64, 21.0, 30, 0.7, 0.1);
        let d = drift_velocity(&traj, 1).unwrap();
        assert!((d.speed - 0.7).abs() < 1e-10);
        // relabel frame k by k·s·Δt
        let s = 0.25;
        let moved: Vec<FieldState> = traj
            .iter()
            .map(|f| crate::propagator::shift(f, s * f.time).unwrap())
            .collect();
        let d2 = drift_velocity(&moved, 1).unwrap();
        assert!((d2.speed - d.speed - s).abs() < 1e-10);
    }

    #[test]
    fn coarse_cadence_is_rejected() {
        // 140 mm/s on R = 21 mm turns the phase by ~3.0 rad per frame
        let traj = travelling(64, 21.0, 12, 140.0, 0.0);
        assert!(matches!(drift_velocity(&traj, 1), Err(Error::Fit(_))));
    }

    #[test]
    fn phase_lag_conventions() {
        let grid = Grid::new(64, 21.0).unwrap();
        let c: Vec<f64> = grid.points().map(|x| (x / 21.0).cos()).collect();
        let s: Vec<f64> = grid.points().map(|x| (x / 21.0).sin()).collect();
        let st = FieldState::new(grid, c.clone(), s, 0.0).unwrap();
        assert!((phase_lag(&st, 1).unwrap() + PI / 2.0).abs() < 1e-12);
        let eq = FieldState::new(grid, c.clone(), c.clone(), 0.0).unwrap();
        assert!(phase_lag(&eq, 1).unwrap().abs() < 1e-12);
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        let opp = FieldState::new(grid, c.clone(), neg, 0.0).unwrap();
        assert!((phase_lag(&opp, 1).unwrap() - PI).abs() < 1e-12);
        let zero = FieldState::new(grid, c, vec![0.0; 64], 0.0).unwrap();
        assert!(phase_lag(&zero, 1).is_err());
    }

    #[test]
    fn ep_lag_curve() {
        assert_eq!(ep_phase_lag(0.2, 0.0), 0.0);
        assert!((ep_phase_lag(0.2, 10.0) - 1.176_005_207_095_135).abs() < 1e-12);
        assert!((ep_phase_lag(0.2, 1e9) - PI / 2.0).abs() < 1e-8);
    }

    fn two_mode(eps: f64, z_span: f64, dz: f64) -> Vec<f64> {
        let chi1 = (1.0 - eps * eps).sqrt();
        let len = (z_span / dz) as usize;
        (0..len)
            .map(|j| {
                let z = j as f64 * dz;
                0.7 * (chi1 * z).cos() + (z).cos()
            })
            .collect()
    }

    #[test]
    fn beat_of_two_mode_profile() {
        for eps in [0.86, 0.96] {
            let profile = two_mode(eps, 200.0 * PI, 0.1);
            let beat = beat_wavenumber(&profile, 0.1).unwrap().unwrap();
            let expected = expected_beat(eps).unwrap();
            assert!((beat - expected).abs() < 1e-4, "eps {eps}: {beat} vs {expected}");
        }
        assert!((expected_beat(0.86).unwrap() - 0.489_706).abs() < 1e-6);
        assert!((expected_beat(0.96).unwrap() - 0.72).abs() < 1e-12);
    }

    #[test]
    fn single_harmonic_has_no_beat() {
        let dz = 2.0 * PI / 256.0;
        let profile: Vec<f64> = (0..256).map(|j| 3.0 + (j as f64 * dz).cos()).collect();
        assert_eq!(beat_wavenumber(&profile, dz).unwrap(), None);
    }

    #[test]
    fn compare_norms() {
        let grid = Grid::new(32, 21.0).unwrap();
        let a: Vec<f64> = grid.points().map(|x| (x / 21.0).cos()).collect();
        let fa = FieldState::new(grid, a.clone(), a.clone(), 1.0).unwrap();
        let zero = compare(&fa, &fa).unwrap();
        assert_eq!(zero.max_linf_abs(), 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        let fb = FieldState::new(grid, shifted.clone(), shifted, 1.0).unwrap();
        let c = compare(&fb, &fa).unwrap();
        assert!((c.ring1.linf_abs - 1.0).abs() < 1e-15);
        assert!((c.ring2.l2_abs - 1.0).abs() < 1e-15);
        // offset carried by T0 instead of the samples
        let fc = fa.clone().with_reference(1.0);
        assert!((compare(&fc, &fa).unwrap().max_linf_abs() - 1.0).abs() < 1e-15);
        let other = FieldState::new(Grid::new(64, 21.0).unwrap(), vec![0.0; 64], vec![0.0; 64], 1.0).unwrap();
        assert!(matches!(compare(&fa, &other), Err(Error::Shape(_))));
        let later = FieldState::new(grid, a.clone(), a, 2.0).unwrap();
        assert!(compare(&fa, &later).is_err());
    }

    #[test]
    fn estimators_ignore_reference_offset() {
        let traj = travelling(64, 21.0, 20, 0.4, 0.2);
        let lifted: Vec<FieldState> = traj
            .iter()
            .map(|f| {
                let mut g = f.clone().with_reference(300.0);
                g.t1.iter_mut().for_each(|v| *v += 5.0);
                g.t2.iter_mut().for_each(|v| *v += 5.0);
                g
            })
            .collect();
        let a = ObservableReport::from_trajectory("x", &traj, 1).unwrap();
        let b = ObservableReport::from_trajectory("x", &lifted, 1).unwrap();
        assert!((a.decay.rate - b.decay.rate).abs() < 1e-12);
        assert!((a.drift.speed - b.drift.speed).abs() < 1e-12);
        assert!((a.phase_lag - b.phase_lag).abs() < 1e-12);
        assert_eq!(a.beat_wavenumber, b.beat_wavenumber);
    }

    #[test]
    fn report_csv_columns() {
        let traj = travelling(64, 21.0, 20, 0.4, 0.2);
        let rep = ObservableReport::from_trajectory("spectral", &traj, 1).unwrap();
        let csv = observables_csv(std::slice::from_ref(&rep));
        let lines: Vec<_> = csv.lines().collect();
        assert!(lines[0].starts_with('#') && lines[0].contains("ring 2 leads"));
        assert_eq!(lines[1].split(',').count(), lines[2].split(',').count());
        assert!(lines[2].starts_with("spectral,"));
        assert!(rep.summary_text().contains("ring 2 leads"));
    }
}
