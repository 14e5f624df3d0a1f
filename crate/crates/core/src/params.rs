//! Physical constants, ring geometry, mode bookkeeping and the
//! nondimensionalization used by the exceptional-point analysis.
//!
//! Everything is stored in mm–kg–s–K. Public constructors take SI values;
//! the parameter file uses the per-key units listed in [`PARAM_FILE_UNITS`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::{Error, Result};

const MM_PER_M: f64 = 1.0e3;

/// Units of every key accepted in a parameter file, in the order they are
/// documented in the file header (`# key unit`).
pub const PARAM_FILE_UNITS: &[(&str, &str)] = &[
    ("D", "mm^2/s"),
    ("rho", "kg/m^3"),
    ("c", "J/(kg*K)"),
    ("k_i", "W/(m*K)"),
    ("d", "mm"),
    ("b", "mm"),
    ("a", "mm"),
];

/// Material and interface constants of two identical rings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// mm²/s
    diffusivity: f64,
    /// kg/mm³
    density: f64,
    /// J/(kg·K)
    heat_capacity: f64,
    /// W/(mm·K)
    interface_conductivity: f64,
    /// mm
    interface_thickness: f64,
    /// mm
    ring_thickness: f64,
    /// Length `a` listed with the experimental constants. Carried as
    /// metadata only; nothing in the model reads it.
    length_a: Option<f64>,
}

impl PhysicalParams {
    /// Builds parameters from SI values: D [m²/s], ρ [kg/m³], c [J/(kg·K)],
    /// k_i [W/(m·K)], d [m], b [m].
    pub fn new_si(
        diffusivity: f64,
        density: f64,
        heat_capacity: f64,
        interface_conductivity: f64,
        interface_thickness: f64,
        ring_thickness: f64,
    ) -> Result<Self> {
        Self::from_internal(
            diffusivity * MM_PER_M * MM_PER_M,
            density / (MM_PER_M * MM_PER_M * MM_PER_M),
            heat_capacity,
            interface_conductivity / MM_PER_M,
            interface_thickness * MM_PER_M,
            ring_thickness * MM_PER_M,
        )
    }

    /// The experimental set: D = 100 mm²/s, ρ = 1000 kg/m³,
    /// c = 1000 J/(kg·K), k_i = 1 W/(m·K), d = 1 mm, b = 5 mm.
    pub fn paper() -> Self {
        let mut p = Self::new_si(1.0e-4, 1000.0, 1000.0, 1.0, 1.0e-3, 5.0e-3)
            .expect("experimental constants are positive");
        p.length_a = Some(100.0);
        p
    }

    fn from_internal(
        diffusivity: f64,
        density: f64,
        heat_capacity: f64,
        interface_conductivity: f64,
        interface_thickness: f64,
        ring_thickness: f64,
    ) -> Result<Self> {
        let fields = [
            ("D", diffusivity),
            ("rho", density),
            ("c", heat_capacity),
            ("k_i", interface_conductivity),
            ("d", interface_thickness),
            ("b", ring_thickness),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        Ok(Self {
            diffusivity,
            density,
            heat_capacity,
            interface_conductivity,
            interface_thickness,
            ring_thickness,
            length_a: None,
        })
    }

    /// Reads a `key = value` parameter file. See [`PARAM_FILE_UNITS`].
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_key_values(text)?;
        Self::from_entries(&entries)
    }

    /// Builds parameters from already-parsed entries; every key must be a
    /// parameter key.
    pub fn from_entries(entries: &BTreeMap<String, KeyValue>) -> Result<Self> {
        for kv in entries.values() {
            if !PARAM_FILE_UNITS.iter().any(|(k, _)| *k == kv.key) {
                return Err(Error::Parse {
                    line: kv.line,
                    msg: format!("unknown key `{}`", kv.key),
                });
            }
        }
        let get = |key: &str| -> Result<f64> {
            entries
                .get(key)
                .ok_or_else(|| Error::Config(format!("missing parameter `{key}`")))?
                .as_f64()
        };
        let mut p = Self::from_internal(
            get("D")?,
            get("rho")? / (MM_PER_M * MM_PER_M * MM_PER_M),
            get("c")?,
            get("k_i")? / MM_PER_M,
            get("d")?,
            get("b")?,
        )?;
        if entries.contains_key("a") {
            p.length_a = Some(get("a")?);
        }
        Ok(p)
    }

    /// Serializes back to the parameter file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, unit) in PARAM_FILE_UNITS {
            out.push_str(&format!("# {key} {unit}\n"));
        }
        let mut line = |k: &str, v: f64| out.push_str(&format!("{k} = {}\n", crate::fmt::sci(v)));
        line("D", self.diffusivity);
        line("rho", self.density * MM_PER_M * MM_PER_M * MM_PER_M);
        line("c", self.heat_capacity);
        line("k_i", self.interface_conductivity * MM_PER_M);
        line("d", self.interface_thickness);
        line("b", self.ring_thickness);
        if let Some(a) = self.length_a {
            line("a", a);
        }
        out
    }

    /// D [mm²/s]
    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    /// ρ [kg/mm³]
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn heat_capacity(&self) -> f64 {
        self.heat_capacity
    }

    /// k_i [W/(mm·K)]
    pub fn interface_conductivity(&self) -> f64 {
        self.interface_conductivity
    }

    pub fn interface_thickness(&self) -> f64 {
        self.interface_thickness
    }

    pub fn ring_thickness(&self) -> f64 {
        self.ring_thickness
    }

    pub fn length_a(&self) -> Option<f64> {
        self.length_a
    }

    /// Interface heat-exchange coefficient h = k_i/d [W/(mm²·K)].
    pub fn exchange_coefficient(&self) -> f64 {
        self.interface_conductivity / self.interface_thickness
    }

    /// Coupling rate h_c = h/(ρ c b) [1/s].
    pub fn coupling_rate(&self) -> f64 {
        self.exchange_coefficient() / (self.density * self.heat_capacity * self.ring_thickness)
    }

    /// h_c evaluated entirely in SI units.
    pub fn coupling_rate_si(&self) -> f64 {
        let k_i = self.interface_conductivity * MM_PER_M;
        let d = self.interface_thickness / MM_PER_M;
        let rho = self.density * MM_PER_M * MM_PER_M * MM_PER_M;
        let b = self.ring_thickness / MM_PER_M;
        k_i / (d * rho * self.heat_capacity * b)
    }

    /// The two coefficients the dynamics actually depends on.
    pub fn transport(&self) -> Transport {
        Transport {
            diffusivity: self.diffusivity,
            coupling: self.coupling_rate(),
        }
    }
}

/// D and h_c, the only material data entering the ring equations.
///
/// Unlike [`PhysicalParams`] this allows `coupling == 0` (decoupled rings).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transport {
    /// mm²/s
    pub diffusivity: f64,
    /// 1/s
    pub coupling: f64,
}

impl Transport {
    pub fn new(diffusivity: f64, coupling: f64) -> Result<Self> {
        if !(diffusivity.is_finite() && diffusivity > 0.0) {
            return Err(Error::domain(format!("diffusivity must be positive, got {diffusivity}")));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::domain(format!("coupling must be non-negative, got {coupling}")));
        }
        Ok(Self { diffusivity, coupling })
    }

    /// Decay rate κ²D + h_c shared by both rings at wavenumber κ.
    pub fn mode_decay(&self, kappa: f64) -> f64 {
        kappa * kappa * self.diffusivity + self.coupling
    }
}

/// Inner edge of a ring. The radial width is metadata; the model lives on
/// the inner edge only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    radius: f64,
    delta_radius: Option<f64>,
}

impl RingGeometry {
    pub fn new(radius_mm: f64) -> Result<Self> {
        if !(radius_mm.is_finite() && radius_mm > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius_mm}")));
        }
        Ok(Self {
            radius: radius_mm,
            delta_radius: None,
        })
    }

    pub fn with_delta_radius(mut self, delta_radius_mm: f64) -> Result<Self> {
        if !(delta_radius_mm.is_finite() && delta_radius_mm > 0.0) {
            return Err(Error::domain(format!(
                "radial width must be positive, got {delta_radius_mm}"
            )));
        }
        self.delta_radius = Some(delta_radius_mm);
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta_radius(&self) -> Option<f64> {
        self.delta_radius
    }

    pub fn outer_radius(&self) -> Option<f64> {
        self.delta_radius.map(|dr| self.radius + dr)
    }

    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }
}

/// A ring harmonic e^{i n x / R}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    n: i32,
    kappa: f64,
}

impl ModeSpec {
    pub fn new(n: i32, geometry: &RingGeometry) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("mode number must be nonzero"));
        }
        Ok(Self {
            n,
            kappa: n as f64 / geometry.radius(),
        })
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    /// κ = n/R [1/mm]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Tangential speeds in the sign convention of the ring equations:
/// ring 1 is advected by `-v1 ∂x`, ring 2 by `+v2 ∂x`. Counter-rotation at
/// equal speed is `v1 == v2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpeeds {
    pub v1: f64,
    pub v2: f64,
}

impl RingSpeeds {
    pub fn symmetric(v: f64) -> Self {
        Self { v1: v, v2: v }
    }

    /// Ring 1 sped up and ring 2 slowed down by `dv` around `v`.
    pub fn detuned(v: f64, dv: f64) -> Self {
        Self {
            v1: v + dv,
            v2: v - dv,
        }
    }

    /// Symmetric part (v1 + v2)/2; the part that enters the EP condition.
    pub fn mean(&self) -> f64 {
        0.5 * (self.v1 + self.v2)
    }

    /// Antisymmetric part (v1 − v2)/2, the drift of the common frame.
    pub fn detuning(&self) -> f64 {
        0.5 * (self.v1 - self.v2)
    }

    pub fn max_abs(&self) -> f64 {
        self.v1.abs().max(self.v2.abs())
    }
}

/// Tangential speed of the exceptional point, h_c/|κ| [mm/s].
pub fn v_ep(coupling: f64, kappa: f64) -> Result<f64> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::domain("the uniform mode (kappa = 0) has no exceptional point"));
    }
    Ok(coupling / kappa.abs())
}

/// ε = h_c R² / (D n²).
pub fn epsilon_of(transport: &Transport, radius: f64, n: i32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("mode number must be nonzero"));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let n = n as f64;
    Ok(transport.coupling * radius * radius / (transport.diffusivity * n * n))
}

/// λ = 1 + 1/ε, the decay exponent in units of h_c.
pub fn lambda_of(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(1.0 + 1.0 / epsilon)
}

/// Maps (x [mm], t [s]) to (z, τ) = (√(h_c(λ−1)/D)·x, h_c·t).
pub fn nondimensionalize(x: f64, t: f64, transport: &Transport, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 1.0) {
        return Err(Error::domain(format!("lambda must exceed 1, got {lambda}")));
    }
    let scale = (transport.coupling * (lambda - 1.0) / transport.diffusivity).sqrt();
    Ok((scale * x, transport.coupling * t))
}

/// One `key = value` line from a config or parameter file.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyValue {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl KeyValue {
    pub fn as_f64(&self) -> Result<f64> {
        self.value.parse::<f64>().map_err(|_| Error::Parse {
            line: self.line,
            msg: format!("`{}` expects a number, got `{}`", self.key, self.value),
        })
    }
}

/// Parses UTF-8 `key = value` lines. `#` starts a comment; blank lines are
/// skipped; duplicate keys are rejected.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, KeyValue>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line,
                msg: "empty key or value".into(),
            });
        }
        let kv = KeyValue {
            key: key.to_string(),
            value: value.to_string(),
            line,
        };
        if out.insert(key.to_string(), kv).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(out)
}
