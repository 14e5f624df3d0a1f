//! Sampled temperature fields on the periodic ring and the snapshot CSV
//! format shared by both solvers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::fmt::sci;
use crate::{Error, Result};

/// Uniform periodic grid `x_j = j·2πR/N` on the ring's inner edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    len: usize,
    radius: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 4;

    pub fn new(len: usize, radius_mm: f64) -> Result<Self> {
        if len < Self::MIN_POINTS {
            return Err(Error::domain(format!(
                "grid needs at least {} points, got {len}",
                Self::MIN_POINTS
            )));
        }
        if !(radius_mm.is_finite() && radius_mm > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius_mm}")));
        }
        Ok(Self { len, radius: radius_mm })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }

    pub fn dx(&self) -> f64 {
        self.circumference() / self.len as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.x(j))
    }

    /// Wavenumber of signed mode `n`.
    pub fn kappa(&self, n: i64) -> f64 {
        n as f64 / self.radius
    }
}

/// Temperature deviations `T_i − T0` of both rings at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// s
    pub time: f64,
    /// Reference temperature T0 [K]; the arrays are deviations from it.
    pub reference_temp: f64,
}

impl FieldState {
    pub fn new(grid: Grid, t1: Vec<f64>, t2: Vec<f64>, time: f64) -> Result<Self> {
        if t1.len() != grid.len() || t2.len() != grid.len() {
            return Err(Error::Shape(format!(
                "ring arrays have lengths {} and {}, grid has {}",
                t1.len(),
                t2.len(),
                grid.len()
            )));
        }
        if t1.iter().chain(&t2).any(|v| !v.is_finite()) {
            return Err(Error::domain("temperature samples must be finite"));
        }
        Ok(Self {
            grid,
            t1,
            t2,
            time,
            reference_temp: 0.0,
        })
    }

    pub fn with_reference(mut self, t0: f64) -> Self {
        self.reference_temp = t0;
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.t1.iter().chain(&self.t2).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Spatial mean of T1 + T2.
    pub fn mean_sum(&self) -> f64 {
        let s: f64 = self.t1.iter().zip(&self.t2).map(|(a, b)| a + b).sum();
        s / self.grid.len() as f64
    }

    pub fn to_snapshot_csv(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() * 80 + 128);
        out.push_str(&format!("# t_s = {}\n", sci(self.time)));
        out.push_str(&format!("# radius_mm = {}\n", sci(self.grid.radius())));
        out.push_str(&format!("# T0_K = {}\n", sci(self.reference_temp)));
        out.push_str(SNAPSHOT_CSV_HEADER);
        out.push('\n');
        for j in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                sci(self.grid.x(j)),
                sci(self.t1[j]),
                sci(self.t2[j])
            ));
        }
        out
    }

    /// Parses the format written by [`FieldState::to_snapshot_csv`]. The
    /// x column must match the uniform grid implied by `radius_mm`.
    pub fn from_snapshot_csv(text: &str) -> Result<Self> {
        let mut time = None;
        let mut radius = None;
        let mut t0 = 0.0;
        let mut header_seen = false;
        let mut xs = Vec::new();
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            if let Some(comment) = content.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    let value: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| perr(format!("bad number `{}`", v.trim())))?;
                    match k.trim() {
                        "t_s" => time = Some(value),
                        "radius_mm" => radius = Some(value),
                        "T0_K" => t0 = value,
                        other => return Err(perr(format!("unknown header `{other}`"))),
                    }
                }
                continue;
            }
            if !header_seen {
                if content.replace(' ', "") != SNAPSHOT_CSV_HEADER {
                    return Err(perr(format!("expected `{SNAPSHOT_CSV_HEADER}`")));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = content.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(perr(format!("expected 3 columns, got {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("bad number `{s}`")));
            xs.push(num(cols[0])?);
            t1.push(num(cols[1])?);
            t2.push(num(cols[2])?);
        }
        let time = time.ok_or_else(|| Error::Config("snapshot lacks `# t_s` header".into()))?;
        let radius =
            radius.ok_or_else(|| Error::Config("snapshot lacks `# radius_mm` header".into()))?;
        let grid = Grid::new(xs.len(), radius)?;
        for (j, &x) in xs.iter().enumerate() {
            if (x - grid.x(j)).abs() > 1e-9 * grid.circumference() {
                return Err(Error::Shape(format!(
                    "x column is not the uniform ring grid at row {j}"
                )));
            }
        }
        Ok(FieldState::new(grid, t1, t2, time)?.with_reference(t0))
    }
}

pub const SNAPSHOT_CSV_HEADER: &str = "x_mm,T1_K,T2_K";

/// Receives snapshots as the simulation produces them.
pub trait SnapshotSink {
    fn accept(&mut self, frame: usize, state: &FieldState) -> Result<()>;
}

impl SnapshotSink for Vec<FieldState> {
    fn accept(&mut self, _frame: usize, state: &FieldState) -> Result<()> {
        self.push(state.clone());
        Ok(())
    }
}

/// Discards every snapshot.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl SnapshotSink for NullSink {
    fn accept(&mut self, _frame: usize, _state: &FieldState) -> Result<()> {
        Ok(())
    }
}

/// Initial temperature profiles with amplitude A on mode n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// T1 = T2 = A cos(nx/R)
    CosCos,
    /// T1 = A cos(nx/R), T2 = A sin(nx/R)
    CosSin,
    /// T1 = A cos(nx/R), T2 = −A sin(nx/R); the shape-preserving pair at the EP
    CosNegSin,
}

impl InitialCondition {
    pub fn build(self, grid: Grid, n: i32, amplitude: f64) -> FieldState {
        let k = n as f64 / grid.radius();
        let (t1, t2): (Vec<f64>, Vec<f64>) = grid
            .points()
            .map(|x| {
                let (s, c) = (k * x).sin_cos();
                let second = match self {
                    InitialCondition::CosCos => c,
                    InitialCondition::CosSin => s,
                    InitialCondition::CosNegSin => -s,
                };
                (amplitude * c, amplitude * second)
            })
            .unzip();
        FieldState::new(grid, t1, t2, 0.0).expect("analytic profiles are finite")
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialCondition::CosCos => "cos-cos",
            InitialCondition::CosSin => "cos-sin",
            InitialCondition::CosNegSin => "cos-negsin",
        })
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cos-cos" => Ok(InitialCondition::CosCos),
            "cos-sin" => Ok(InitialCondition::CosSin),
            "cos-negsin" => Ok(InitialCondition::CosNegSin),
            other => Err(Error::Config(format!(
                "unknown initial condition `{other}` (expected cos-cos, cos-sin or cos-negsin)"
            ))),
        }
    }
}
