//! Closed-form analysis of the ring system at the exceptional point.
//!
//! With `τ = h_c t`, `z = √(h_c(λ−1)/D)·x` and the separable ansatz
//! `ΔT_i = e^{−λτ} f_i(z)`, the profiles obey
//!
//! ```text
//! f1'' − a f1' + f1 + ε f2 = 0
//! f2'' + a f2' + f2 + ε f1 = 0          ε = 1/(λ − 1),  a² = ε v²/(D h_c)
//! ```
//!
//! Eliminating `f2` gives `f1'''' + (2 − a²) f1'' + (1 − ε²) f1 = 0`, whose
//! characteristic roots in χ² are handled by [`chi_squared`]. On the ring
//! (periodicity in z) and at the EP one gets `ε = h_c R²/(D n²)` and `a = ε`.
//!
//! Two exponents for the homogeneous part of `f2` are carried side by side,
//! see [`ExponentVariant`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::dft;
use crate::fmt::sci;
use crate::params::{epsilon_of, lambda_of, Transport};
use crate::{Error, Result};

/// Lower and upper edge of the open ε window where damped spatial Rabi
/// oscillations occur at the EP.
pub const EPSILON_WINDOW: (f64, f64) = (0.8, 1.0);

/// Smallest grid accepted by the finite-difference residual checks.
pub const MIN_RESIDUAL_POINTS: usize = 32;

/// Roots in χ² of `χ⁴ + (2 − a²) χ² + (1 − ε²) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticRoots {
    pub a: f64,
    pub epsilon: f64,
    /// ½(a² − 2 + √(a⁴ − 4a² + 4ε²))
    pub chi2_plus: Complex64,
    /// ½(a² − 2 − √(a⁴ − 4a² + 4ε²))
    pub chi2_minus: Complex64,
    /// a⁴ − 4a² + 4ε²
    pub discriminant: f64,
    /// Condition (i): discriminant > 0.
    pub condition_i: bool,
    /// Condition (ii): a² − 2 + √discriminant < 0.
    pub condition_ii: bool,
}

impl QuarticRoots {
    /// Both χ² real and negative, i.e. both spatial solutions oscillate.
    pub fn oscillatory(&self) -> bool {
        self.condition_i && self.condition_ii
    }

    /// `(χ1, χ2) = (√|χ₊²|, √|χ₋²|)` when oscillatory.
    pub fn chis(&self) -> Option<(f64, f64)> {
        self.oscillatory()
            .then(|| (self.chi2_plus.re.abs().sqrt(), self.chi2_minus.re.abs().sqrt()))
    }

    /// Quartic evaluated at each root, scaled by `max(1, |χ²|²)`.
    pub fn residuals(&self) -> [f64; 2] {
        let b = 2.0 - self.a * self.a;
        let c = 1.0 - self.epsilon * self.epsilon;
        [self.chi2_plus, self.chi2_minus].map(|u| {
            let r = u * u + u * b + c;
            r.norm() / u.norm_sqr().max(1.0)
        })
    }
}

pub fn chi_squared(a: f64, epsilon: f64) -> QuarticRoots {
    let a2 = a * a;
    let disc = a2 * a2 - 4.0 * a2 + 4.0 * epsilon * epsilon;
    let root = Complex64::new(disc, 0.0).sqrt();
    let base = Complex64::new(a2 - 2.0, 0.0);
    let condition_i = disc > 0.0;
    let condition_ii = condition_i && a2 - 2.0 + disc.sqrt() < 0.0;
    QuarticRoots {
        a,
        epsilon,
        chi2_plus: (base + root) * 0.5,
        chi2_minus: (base - root) * 0.5,
        discriminant: disc,
        condition_i,
        condition_ii,
    }
}

/// `a_crit = 2(1 − √(1 − ε²))` for `0 ≤ ε ≤ 1`.
pub fn a_crit(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain(format!("a_crit needs 0 <= epsilon <= 1, got {epsilon}")));
    }
    Ok(2.0 * (1.0 - (1.0 - epsilon * epsilon).sqrt()))
}

/// Window conditions at the EP (`a = ε`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowVerdict {
    /// Condition (ii) with `a = ε`, equivalent to ε < 1.
    pub condition_ii: bool,
    /// `a < a_crit(ε)` with `a = ε`.
    pub below_a_crit: bool,
    /// Condition (i) in its raw form; holds for every ε ≠ 0 when `a = ε`.
    pub condition_i: bool,
}

impl WindowVerdict {
    pub fn inside(&self) -> bool {
        self.condition_ii && self.below_a_crit
    }
}

pub fn window_conditions(epsilon: f64) -> WindowVerdict {
    let roots = chi_squared(epsilon, epsilon);
    let below_a_crit = a_crit(epsilon).map(|ac| epsilon < ac).unwrap_or(false);
    WindowVerdict {
        condition_ii: roots.condition_ii,
        below_a_crit,
        condition_i: roots.condition_i,
    }
}

/// Closed-form ε window `(4/5, 1)`.
pub fn epsilon_window() -> (f64, f64) {
    EPSILON_WINDOW
}

/// Strict membership in the open ε window.
pub fn in_epsilon_window(epsilon: f64) -> bool {
    epsilon > EPSILON_WINDOW.0 && epsilon < EPSILON_WINDOW.1
}

/// Brute-force recovery of the window: evaluates [`window_conditions`] on
/// `ε = k·step` over `(0, 2)` and places each edge midway between the last
/// failing and first passing sample (and vice versa).
pub fn scan_epsilon_window(step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && step < 0.1) {
        return Err(Error::domain(format!("scan step must be in (0, 0.1), got {step}")));
    }
    let count = (2.0 / step) as usize;
    let mut lo = None;
    let mut hi = None;
    let mut prev = (0.0, false);
    for k in 1..=count {
        let eps = k as f64 * step;
        let inside = window_conditions(eps).inside();
        if inside && !prev.1 && lo.is_none() {
            lo = Some(0.5 * (prev.0 + eps));
        }
        if !inside && prev.1 {
            hi = Some(0.5 * (prev.0 + eps));
        }
        prev = (eps, inside);
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err(Error::Search("no closed epsilon window found in (0, 2)".into())),
    }
}

/// Inner radii `(R_lo, R_hi)` [mm] for which mode `n` sits inside the ε
/// window: `|n|·√(4D/5h_c) < R < |n|·√(D/h_c)`.
pub fn radius_window(transport: &Transport, n: i32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::domain("mode number must be nonzero"));
    }
    if !(transport.coupling > 0.0) {
        return Err(Error::domain("radius window needs a positive coupling rate"));
    }
    let scale = f64::from(n.unsigned_abs() as i32) * (transport.diffusivity / transport.coupling).sqrt();
    Ok((scale * EPSILON_WINDOW.0.sqrt(), scale * EPSILON_WINDOW.1.sqrt()))
}

/// `R·√(h_c/(Dε))·χ` for the two admissible spatial frequencies; the
/// second equals `|n|` (the ring-periodic branch).
pub fn periodicity_numbers(transport: &Transport, radius: f64, n: i32) -> Result<(f64, f64)> {
    let eps = epsilon_of(transport, radius, n)?;
    let (chi1, chi2) = chi_squared(eps, eps)
        .chis()
        .ok_or_else(|| Error::domain(format!("epsilon = {eps} gives no oscillatory roots")))?;
    let scale = radius * (transport.coupling / (transport.diffusivity * eps)).sqrt();
    Ok((chi1 * scale, chi2 * scale))
}

/// Exponent used for the homogeneous part of `f2`.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentVariant {
    /// `e^{−z/(2ε)}`, i.e. `e^{−D x/(2R³h_c)}` for n = 1, as printed with
    /// the profile and consistent with the exponential in the φ formula.
    PaperLiteral,
    /// `e^{−εz/2}`, i.e. `e^{−h_c R x/(2D)}` for n = 1, from the roots
    /// `−ε/2 ± i√(1 − ε²/4)` of `r² + εr + 1 = 0`.
    #[default]
    OdeConsistent,
}

impl ExponentVariant {
    pub const ALL: [ExponentVariant; 2] = [ExponentVariant::PaperLiteral, ExponentVariant::OdeConsistent];

    /// Decay of the homogeneous term per unit z.
    pub fn decay_per_z(self, epsilon: f64) -> f64 {
        match self {
            ExponentVariant::PaperLiteral => 1.0 / (2.0 * epsilon),
            ExponentVariant::OdeConsistent => 0.5 * epsilon,
        }
    }
}

impl fmt::Display for ExponentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentVariant::PaperLiteral => "paper_literal",
            ExponentVariant::OdeConsistent => "ode_consistent",
        })
    }
}

/// Which initial-temperature family the profile constants are chosen for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileFamily {
    /// T1 = T2 = T0 + A cos(x/R): B1 = A, A2 = A sec φ.
    EqualCosines,
    /// T1 = T0 + A cos, T2 = T0 + A sin: B1 = −A, A2 = 0.
    CosineSine,
}

/// `φ = arctan[cot(2πα) − csc(2πα)·e^{2π·decay}]`, which makes the
/// profile `A e^{−decay·z} sec φ cos(αz + φ) − A sin z` take equal values
/// at z = 0 and z = 2π.
pub fn phi_for_decay(alpha: f64, decay_per_z: f64) -> Result<f64> {
    let (s, c) = (2.0 * PI * alpha).sin_cos();
    if s.abs() < 1e-12 {
        return Err(Error::Singular(format!(
            "sin(2π·alpha) vanishes for alpha = {alpha}; phi is undefined"
        )));
    }
    Ok((c / s - (2.0 * PI * decay_per_z).exp() / s).atan())
}

/// The printed phase formula: `φ = arctan[cot(2πα) − csc(2πα)·e^{π/ε}]`
/// (`e^{πD/(h_c R²)}` for n = 1).
pub fn phi_formula(alpha: f64, epsilon: f64) -> Result<f64> {
    phi_for_decay(alpha, ExponentVariant::PaperLiteral.decay_per_z(epsilon))
}

/// Closed-form profiles `f1`, `f2` for one ring radius and mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSolution {
    pub epsilon: f64,
    pub lambda: f64,
    /// √(1 − (ε/2)²)
    pub alpha: f64,
    pub phi: f64,
    /// Initial amplitude A [K].
    pub amplitude: f64,
    pub b1: f64,
    pub a2: f64,
    pub n: i32,
    pub radius: f64,
    pub variant: ExponentVariant,
    pub family: ProfileFamily,
}

impl ClosedFormSolution {
    /// Profiles for equal cosine initial temperatures, with φ from
    /// [`phi_formula`].
    pub fn new(
        transport: &Transport,
        radius: f64,
        n: i32,
        amplitude: f64,
        variant: ExponentVariant,
    ) -> Result<Self> {
        let epsilon = epsilon_of(transport, radius, n)?;
        if !(epsilon > 0.0 && epsilon < 2.0) {
            return Err(Error::domain(format!(
                "closed form needs 0 < epsilon < 2, got {epsilon}"
            )));
        }
        let alpha = (1.0 - 0.25 * epsilon * epsilon).sqrt();
        let phi = phi_formula(alpha, epsilon)?;
        let sol = Self {
            epsilon,
            lambda: lambda_of(epsilon)?,
            alpha,
            phi,
            amplitude,
            b1: amplitude,
            a2: 0.0,
            n,
            radius,
            variant,
            family: ProfileFamily::EqualCosines,
        };
        sol.with_phi(phi)
    }

    /// Profiles for the cosine/sine initial temperatures (B1 = −A, A2 = 0).
    /// φ plays no role here and is left at 0.
    pub fn cosine_sine(transport: &Transport, radius: f64, n: i32, amplitude: f64) -> Result<Self> {
        let epsilon = epsilon_of(transport, radius, n)?;
        if !(epsilon > 0.0 && epsilon < 2.0) {
            return Err(Error::domain(format!(
                "closed form needs 0 < epsilon < 2, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            lambda: lambda_of(epsilon)?,
            alpha: (1.0 - 0.25 * epsilon * epsilon).sqrt(),
            phi: 0.0,
            amplitude,
            b1: -amplitude,
            a2: 0.0,
            n,
            radius,
            variant: ExponentVariant::default(),
            family: ProfileFamily::CosineSine,
        })
    }

    pub fn with_variant(mut self, variant: ExponentVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Replaces φ (and A2 = A sec φ for the equal-cosine family).
    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        self.phi = phi;
        if self.family == ProfileFamily::EqualCosines {
            let c = phi.cos();
            if c.abs() < 1e-300 || !phi.is_finite() {
                return Err(Error::Singular(format!("sec(phi) undefined at phi = {phi}")));
            }
            self.a2 = self.amplitude / c;
        }
        Ok(self)
    }

    /// z per mm of arc: |n|/R.
    pub fn z_per_mm(&self) -> f64 {
        f64::from(self.n.unsigned_abs() as i32) / self.radius
    }

    pub fn z(&self, x: f64) -> f64 {
        self.z_per_mm() * x
    }

    /// Ring circumference in z units, 2π|n|.
    pub fn z_period(&self) -> f64 {
        self.z(2.0 * PI * self.radius)
    }

    pub fn decay_per_z(&self) -> f64 {
        self.variant.decay_per_z(self.epsilon)
    }

    /// f1(z) = B1 cos z
    pub fn f1_z(&self, z: f64) -> f64 {
        self.b1 * z.cos()
    }

    /// f2(z) = A2 e^{−μz} cos(αz + φ) − B1 sin z
    pub fn f2_z(&self, z: f64) -> f64 {
        self.a2 * (-self.decay_per_z() * z).exp() * (self.alpha * z + self.phi).cos() - self.b1 * z.sin()
    }

    pub fn f2_dz(&self, z: f64) -> f64 {
        let mu = self.decay_per_z();
        let arg = self.alpha * z + self.phi;
        self.a2 * (-mu * z).exp() * (-mu * arg.cos() - self.alpha * arg.sin()) - self.b1 * z.cos()
    }

    /// Temperature deviation of ring 1 at arc position x [mm].
    pub fn f1(&self, x: f64) -> f64 {
        self.f1_z(self.z(x))
    }

    pub fn f2(&self, x: f64) -> f64 {
        self.f2_z(self.z(x))
    }

    /// Mismatch of f2 across the seam x = 0 ≡ 2πR.
    pub fn seam_gap(&self) -> SeamGap {
        let zp = self.z_period();
        SeamGap {
            value: self.f2_z(0.0) - self.f2_z(zp),
            slope: (self.f2_dz(0.0) - self.f2_dz(zp)) * self.z_per_mm(),
        }
    }

    /// φ* from one-dimensional bisection on `f2(0) − f2(2πR)` over
    /// (−π/2, π/2), for the active exponent variant.
    pub fn phi_periodic(&self) -> Result<f64> {
        if self.family != ProfileFamily::EqualCosines {
            return Err(Error::domain("phi only enters the equal-cosine profile"));
        }
        let gap = |phi: f64| -> Result<f64> { Ok(self.with_phi(phi)?.seam_gap().value) };
        let margin = 1e-12;
        let (mut lo, mut hi) = (-FRAC_PI_2 + margin, FRAC_PI_2 - margin);
        let mut g_lo = gap(lo)?;
        let g_hi = gap(hi)?;
        if g_lo.signum() == g_hi.signum() {
            return Err(Error::Search(format!(
                "seam gap does not change sign on (-pi/2, pi/2): {g_lo:e}, {g_hi:e}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = gap(mid)?;
            if g == 0.0 {
                return Ok(mid);
            }
            if g.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
            }
        }
        let (glo, ghi) = (gap(lo)?.abs(), gap(hi)?.abs());
        Ok(if glo <= ghi { lo } else { hi })
    }
}

/// Value and slope mismatch of a profile at the ring seam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeamGap {
    /// f(0) − f(2πR) [K]
    pub value: f64,
    /// f'(0) − f'(2πR) [K/mm]
    pub slope: f64,
}

/// `A1 cos(χ1 z) + B1 cos(χ2 z)`: the general even solution of the quartic
/// profile equation. Its two spatial frequencies beat against each other.
pub fn two_frequency_profile(roots: &QuarticRoots, a1: f64, b1: f64, z: f64) -> Result<f64> {
    let (chi1, chi2) = roots
        .chis()
        .ok_or_else(|| Error::domain("roots are not oscillatory"))?;
    Ok(a1 * (chi1 * z).cos() + b1 * (chi2 * z).cos())
}

fn check_periodic_samples(len: usize, spacing: f64) -> Result<()> {
    if len < MIN_RESIDUAL_POINTS {
        return Err(Error::domain(format!(
            "residual check needs at least {MIN_RESIDUAL_POINTS} points, got {len}"
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::domain(format!("grid spacing must be positive, got {spacing}")));
    }
    Ok(())
}

/// Fourth-order central first derivative on a periodic grid.
pub fn periodic_d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let at = |o: isize| f[(j as isize + o).rem_euclid(n as isize) as usize];
            (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
        })
        .collect()
}

/// Fourth-order central second derivative on a periodic grid.
pub fn periodic_d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let at = |o: isize| f[(j as isize + o).rem_euclid(n as isize) as usize];
            (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h)
        })
        .collect()
}

/// Pointwise residuals of the coupled profile equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResidual {
    /// f1'' − a f1' + f1 + ε f2
    pub first: Vec<f64>,
    /// f2'' + a f2' + f2 + ε f1
    pub second: Vec<f64>,
    /// Largest individual term magnitude in each equation, away from the
    /// seam.
    pub first_scale: f64,
    pub second_scale: f64,
}

impl ProfileResidual {
    pub fn first_linf(&self) -> f64 {
        linf(&self.first)
    }

    pub fn second_linf(&self) -> f64 {
        linf(&self.second)
    }

    /// L∞ skipping the points whose stencil straddles the seam.
    pub fn first_interior_linf(&self) -> f64 {
        linf(interior(&self.first))
    }

    pub fn second_interior_linf(&self) -> f64 {
        linf(interior(&self.second))
    }
}

fn interior(r: &[f64]) -> &[f64] {
    &r[2..r.len() - 2]
}

fn linf(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Residual of the coupled profile equations for periodic samples with
/// spacing `dz`, using fourth-order central differences.
pub fn profile_residual(
    f1: &[f64],
    f2: &[f64],
    dz: f64,
    epsilon: f64,
    a: f64,
) -> Result<ProfileResidual> {
    if f1.len() != f2.len() {
        return Err(Error::Shape(format!("profiles have {} and {} samples", f1.len(), f2.len())));
    }
    check_periodic_samples(f1.len(), dz)?;
    let (d1a, d2a) = (periodic_d1(f1, dz), periodic_d2(f1, dz));
    let (d1b, d2b) = (periodic_d1(f2, dz), periodic_d2(f2, dz));
    let mut first = Vec::with_capacity(f1.len());
    let mut second = Vec::with_capacity(f1.len());
    let (mut s1, mut s2) = (0.0_f64, 0.0_f64);
    let len = f1.len();
    for j in 0..len {
        let t1 = [d2a[j], -a * d1a[j], f1[j], epsilon * f2[j]];
        let t2 = [d2b[j], a * d1b[j], f2[j], epsilon * f1[j]];
        first.push(t1.iter().sum());
        second.push(t2.iter().sum());
        if (2..len - 2).contains(&j) {
            s1 = t1.iter().fold(s1, |m, v| m.max(v.abs()));
            s2 = t2.iter().fold(s2, |m, v| m.max(v.abs()));
        }
    }
    Ok(ProfileResidual {
        first,
        second,
        first_scale: s1,
        second_scale: s2,
    })
}

/// Residual of the fourth-order equation
/// `f'''' + (2 − a²) f'' + (1 − ε²) f = 0` for a periodic profile sampled on
/// `period`, with spectral derivatives. Returns `(L∞ residual, term scale)`.
pub fn quartic_residual(f: &[f64], period: f64, epsilon: f64, a: f64) -> Result<(f64, f64)> {
    check_periodic_samples(f.len(), period / f.len().max(1) as f64)?;
    let d2 = dft::spectral_derivative(f, period, 2);
    let d4 = dft::spectral_derivative(f, period, 4);
    let (b, c) = (2.0 - a * a, 1.0 - epsilon * epsilon);
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for j in 0..f.len() {
        let terms = [d4[j], b * d2[j], c * f[j]];
        worst = worst.max(terms.iter().sum::<f64>().abs());
        scale = terms.iter().fold(scale, |m, v| m.max(v.abs()));
    }
    Ok((worst, scale))
}

/// Everything the `closed-form` command reports for one radius and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub radius: f64,
    pub n: i32,
    pub epsilon: f64,
    pub lambda: f64,
    pub decay_rate: f64,
    pub alpha: f64,
    pub a_crit: Option<f64>,
    pub phi_formula: f64,
    /// φ* per variant, in [`ExponentVariant::ALL`] order.
    pub phi_periodic: [Result<f64, String>; 2],
    /// Seam gaps with φ from the formula, per variant.
    pub seam_formula: [SeamGap; 2],
    pub window: WindowVerdict,
    pub in_epsilon_window: bool,
    pub radius_window: (f64, f64),
    pub radius_in_window: bool,
}

impl ClosedFormReport {
    pub fn new(transport: &Transport, radius: f64, n: i32, amplitude: f64) -> Result<Self> {
        let base = ClosedFormSolution::new(transport, radius, n, amplitude, ExponentVariant::OdeConsistent)?;
        let per_variant = ExponentVariant::ALL.map(|v| base.with_variant(v));
        let radius_window = radius_window(transport, n)?;
        Ok(Self {
            radius,
            n,
            epsilon: base.epsilon,
            lambda: base.lambda,
            decay_rate: base.lambda * transport.coupling,
            alpha: base.alpha,
            a_crit: a_crit(base.epsilon).ok(),
            phi_formula: base.phi,
            phi_periodic: per_variant.map(|s| s.phi_periodic().map_err(|e| e.to_string())),
            seam_formula: per_variant.map(|s| s.seam_gap()),
            window: window_conditions(base.epsilon),
            in_epsilon_window: in_epsilon_window(base.epsilon),
            radius_window,
            radius_in_window: radius > radius_window.0 && radius < radius_window.1,
        })
    }

    /// Plain-text, JSON-shaped summary block.
    pub fn summary_text(&self) -> String {
        let mut lines = vec![
            format!("  \"radius_mm\": {}", sci(self.radius)),
            format!("  \"n\": {}", self.n),
            format!("  \"epsilon\": {}", sci(self.epsilon)),
            format!("  \"lambda\": {}", sci(self.lambda)),
            format!("  \"decay_rate_per_s\": {}", sci(self.decay_rate)),
            format!("  \"alpha\": {}", sci(self.alpha)),
            format!(
                "  \"a_crit\": {}",
                self.a_crit.map_or_else(|| "null".to_string(), sci)
            ),
            format!("  \"phi_formula_rad\": {}", sci(self.phi_formula)),
        ];
        for (variant, (phi, seam)) in ExponentVariant::ALL
            .iter()
            .zip(self.phi_periodic.iter().zip(&self.seam_formula))
        {
            let phi = match phi {
                Ok(v) => sci(*v),
                Err(msg) => format!("\"{msg}\""),
            };
            lines.push(format!("  \"phi_periodic_{variant}_rad\": {phi}"));
            lines.push(format!("  \"seam_value_gap_{variant}_K\": {}", sci(seam.value)));
            lines.push(format!("  \"seam_slope_gap_{variant}_K_per_mm\": {}", sci(seam.slope)));
        }
        lines.extend([
            format!("  \"condition_i\": {}", self.window.condition_i),
            format!("  \"condition_ii\": {}", self.window.condition_ii),
            format!("  \"below_a_crit\": {}", self.window.below_a_crit),
            format!("  \"epsilon_window\": [{}, {}]", sci(EPSILON_WINDOW.0), sci(EPSILON_WINDOW.1)),
            format!("  \"epsilon_in_window\": {}", self.in_epsilon_window),
            format!(
                "  \"radius_window_mm\": [{}, {}]",
                sci(self.radius_window.0),
                sci(self.radius_window.1)
            ),
            format!("  \"radius_in_window\": {}", self.radius_in_window),
        ]);
        format!("{{\n{}\n}}\n", lines.join(",\n"))
    }
}

pub const CLOSED_FORM_CSV_HEADER: &str = "x_mm,f1_K,f2_paper_literal_K,f2_ode_consistent_K";

/// Samples f1 and both f2 variants (φ from the formula) on `points`
/// uniformly spaced positions `x ∈ [0, 2πR]`, endpoints included so the
/// seam is visible.
pub fn closed_form_csv(transport: &Transport, radius: f64, n: i32, amplitude: f64, points: usize) -> Result<String> {
    if points < 2 {
        return Err(Error::domain(format!("need at least 2 points, got {points}")));
    }
    let lit = ClosedFormSolution::new(transport, radius, n, amplitude, ExponentVariant::PaperLiteral)?;
    let ode = lit.with_variant(ExponentVariant::OdeConsistent);
    let span = 2.0 * PI * radius;
    let mut out = String::with_capacity(points * 100);
    out.push_str(CLOSED_FORM_CSV_HEADER);
    out.push('\n');
    for j in 0..points {
        let x = span * j as f64 / (points - 1) as f64;
        out.push_str(&format!(
            "{},{},{},{}\n",
            sci(x),
            sci(lit.f1(x)),
            sci(lit.f2(x)),
            sci(ode.f2(x))
        ));
    }
    Ok(out)
}
