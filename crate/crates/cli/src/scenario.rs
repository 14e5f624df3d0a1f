//! Scenario files: `key = value` lines with physical parameters (or a
//! `params_file` reference) plus run settings. Command-line flags override
//! file values key by key; a speed given on the command line replaces the
//! file's speed specification as a whole.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aptring_core::params::{parse_key_values, v_ep, KeyValue, PARAM_FILE_UNITS};
use aptring_core::{FieldState, Grid, InitialCondition, PhysicalParams, RingGeometry, RingSpeeds};
use clap::Args;

use crate::error::{CliError, CliResult};

pub const SCENARIO_KEYS: &[&str] = &[
    "params_file",
    "radius_mm",
    "delta_radius_mm",
    "n",
    "v",
    "v1",
    "v2",
    "dv",
    "ic",
    "ic_file",
    "amplitude_K",
    "T0_K",
    "solver",
    "grid",
    "t_end_s",
    "frames",
    "safety",
    "out_dir",
];

/// Run settings that may come from a scenario file or from flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Inner ring radius R [mm]
    #[arg(long = "radius-mm")]
    pub radius_mm: Option<f64>,
    /// Radial ring width δR [mm]
    #[arg(long = "delta-radius-mm")]
    pub delta_radius_mm: Option<f64>,
    /// Mode number analysed by the diagnostics
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i32>,
    /// Common ring speed [mm/s], or `ep` for h_c R/|n|
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<String>,
    /// Ring 1 speed [mm/s] (requires --v2)
    #[arg(long, allow_negative_numbers = true)]
    pub v1: Option<f64>,
    /// Ring 2 speed [mm/s] (requires --v1)
    #[arg(long, allow_negative_numbers = true)]
    pub v2: Option<f64>,
    /// Detuning around the EP speed: v1 = v_EP + dv, v2 = v_EP − dv [mm/s]
    #[arg(long, allow_negative_numbers = true)]
    pub dv: Option<f64>,
    /// Initial condition: cos-cos, cos-sin or cos-negsin
    #[arg(long)]
    pub ic: Option<String>,
    /// Initial condition from a snapshot CSV
    #[arg(long = "ic-file")]
    pub ic_file: Option<PathBuf>,
    /// Initial amplitude A [K]
    #[arg(long = "amplitude-k", allow_negative_numbers = true)]
    pub amplitude_k: Option<f64>,
    /// Reference temperature T0 [K]
    #[arg(long = "t0-k", allow_negative_numbers = true)]
    pub t0_k: Option<f64>,
    /// spectral or fd
    #[arg(long, visible_alias = "method")]
    pub solver: Option<String>,
    /// Grid points per ring
    #[arg(long)]
    pub grid: Option<usize>,
    /// End time [s]
    #[arg(long = "t-end-s")]
    pub t_end_s: Option<f64>,
    /// Snapshot intervals between 0 and t_end
    #[arg(long)]
    pub frames: Option<usize>,
    /// Fraction of the explicit stability limit used by the fd solver
    #[arg(long)]
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Spectral,
    Fd,
}

impl FromStr for Solver {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "spectral" => Ok(Solver::Spectral),
            "fd" => Ok(Solver::Fd),
            other => Err(CliError::Config(format!("unknown solver `{other}` (expected spectral or fd)"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Spectral => "spectral",
            Solver::Fd => "fd",
        })
    }
}

/// How the ring speeds were specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedSpec {
    /// v1 = v2 = v
    Symmetric(f64),
    /// v1 = v2 = v_EP
    AtEp,
    Pair { v1: f64, v2: f64 },
    /// v1 = v_EP + dv, v2 = v_EP − dv
    Detuned { dv: f64 },
}

impl SpeedSpec {
    pub fn resolve(self, coupling: f64, kappa: f64) -> CliResult<RingSpeeds> {
        Ok(match self {
            SpeedSpec::Symmetric(v) => RingSpeeds::symmetric(v),
            SpeedSpec::AtEp => RingSpeeds::symmetric(v_ep(coupling, kappa)?),
            SpeedSpec::Pair { v1, v2 } => RingSpeeds { v1, v2 },
            SpeedSpec::Detuned { dv } => RingSpeeds::detuned(v_ep(coupling, kappa)?, dv),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IcSpec {
    Analytic(InitialCondition),
    File(PathBuf),
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: PhysicalParams,
    pub geometry: RingGeometry,
    pub n: i32,
    pub speed: Option<SpeedSpec>,
    pub ic: IcSpec,
    pub amplitude: f64,
    pub t0: f64,
    pub solver: Solver,
    pub grid: usize,
    pub t_end: f64,
    pub frames: usize,
    pub safety: f64,
    pub out_dir: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn number<T: FromStr>(kv: &KeyValue) -> CliResult<T> {
    kv.value.parse::<T>().map_err(|_| {
        CliError::Config(format!(
            "line {}: `{}` has invalid value `{}`",
            kv.line, kv.key, kv.value
        ))
    })
}

fn parse_v(raw: &str) -> CliResult<SpeedSpec> {
    if raw.eq_ignore_ascii_case("ep") {
        return Ok(SpeedSpec::AtEp);
    }
    raw.parse::<f64>()
        .map(SpeedSpec::Symmetric)
        .map_err(|_| CliError::Config(format!("speed must be a number or `ep`, got `{raw}`")))
}

fn speed_from(v: Option<SpeedSpec>, v1: Option<f64>, v2: Option<f64>, dv: Option<f64>) -> CliResult<Option<SpeedSpec>> {
    let forms = [v.is_some(), v1.is_some() || v2.is_some(), dv.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if forms > 1 {
        return Err(CliError::Config(
            "give exactly one speed form: v, v1 with v2, or dv".into(),
        ));
    }
    Ok(match (v, v1, v2, dv) {
        (Some(s), ..) => Some(s),
        (_, Some(v1), Some(v2), _) => Some(SpeedSpec::Pair { v1, v2 }),
        (_, Some(_), None, _) | (_, None, Some(_), _) => {
            return Err(CliError::Config("v1 and v2 must be given together".into()))
        }
        (.., Some(dv)) => Some(SpeedSpec::Detuned { dv }),
        _ => None,
    })
}

/// Loads physical parameters from either inline keys or `params_file`,
/// falling back to the built-in reference set when neither is present.
fn load_params(
    entries: &BTreeMap<String, KeyValue>,
    base_dir: &Path,
    params_flag: Option<&Path>,
) -> CliResult<PhysicalParams> {
    let inline: BTreeMap<String, KeyValue> = entries
        .iter()
        .filter(|(k, _)| PARAM_FILE_UNITS.iter().any(|(p, _)| p == k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if let Some(path) = params_flag {
        return Ok(PhysicalParams::from_text(&read(path)?)?);
    }
    match (entries.get("params_file"), inline.is_empty()) {
        (Some(_), false) => Err(CliError::Config(
            "scenario sets both params_file and inline parameters".into(),
        )),
        (Some(kv), true) => Ok(PhysicalParams::from_text(&read(&base_dir.join(&kv.value))?)?),
        (None, false) => Ok(PhysicalParams::from_entries(&inline)?),
        (None, true) => Ok(PhysicalParams::paper()),
    }
}

impl Scenario {
    /// Resolves file values (if any) overlaid by flags. Paths inside the
    /// file are relative to the file's directory.
    pub fn resolve(config: Option<&Path>, params_flag: Option<&Path>, args: &ScenarioArgs) -> CliResult<Self> {
        let (entries, base_dir) = match config {
            Some(path) => (
                parse_key_values(&read(path)?)?,
                path.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (BTreeMap::new(), PathBuf::new()),
        };
        for kv in entries.values() {
            if !SCENARIO_KEYS.contains(&kv.key.as_str()) && !PARAM_FILE_UNITS.iter().any(|(p, _)| *p == kv.key) {
                return Err(CliError::Config(format!("line {}: unknown scenario key `{}`", kv.line, kv.key)));
            }
        }
        let params = load_params(&entries, &base_dir, params_flag)?;
        let get = |k: &str| entries.get(k);
        let num = |k: &str| -> CliResult<Option<f64>> { get(k).map(number::<f64>).transpose() };

        let radius = args.radius_mm.map_or_else(|| num("radius_mm"), |v| Ok(Some(v)))?.unwrap_or(21.0);
        let mut geometry = RingGeometry::new(radius)?;
        if let Some(dr) = args.delta_radius_mm.map_or_else(|| num("delta_radius_mm"), |v| Ok(Some(v)))? {
            geometry = geometry.with_delta_radius(dr)?;
        }
        let n = match args.n {
            Some(n) => n,
            None => get("n").map(number::<i32>).transpose()?.unwrap_or(1),
        };

        let flag_speed = speed_from(
            args.v.as_deref().map(parse_v).transpose()?,
            args.v1,
            args.v2,
            args.dv,
        )?;
        let speed = match flag_speed {
            Some(s) => Some(s),
            None => speed_from(
                get("v").map(|kv| parse_v(&kv.value)).transpose()?,
                num("v1")?,
                num("v2")?,
                num("dv")?,
            )?,
        };

        let ic = match (&args.ic, &args.ic_file) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either --ic or --ic-file".into())),
            (Some(s), None) => IcSpec::Analytic(s.parse()?),
            (None, Some(p)) => IcSpec::File(p.clone()),
            (None, None) => match (get("ic"), get("ic_file")) {
                (Some(_), Some(_)) => return Err(CliError::Config("scenario sets both ic and ic_file".into())),
                (Some(kv), None) => IcSpec::Analytic(kv.value.parse()?),
                (None, Some(kv)) => IcSpec::File(base_dir.join(&kv.value)),
                (None, None) => IcSpec::Analytic(InitialCondition::CosCos),
            },
        };

        let solver = match &args.solver {
            Some(s) => s.parse()?,
            None => get("solver").map_or(Ok(Solver::Spectral), |kv| kv.value.parse())?,
        };
        let grid = match args.grid {
            Some(g) => g,
            None => get("grid").map(number::<usize>).transpose()?.unwrap_or(256),
        };
        let frames = match args.frames {
            Some(f) => f,
            None => get("frames").map(number::<usize>).transpose()?.unwrap_or(50),
        };
        let pick = |flag: Option<f64>, key: &str, default: f64| -> CliResult<f64> {
            Ok(flag.map_or_else(|| num(key), |v| Ok(Some(v)))?.unwrap_or(default))
        };
        let scenario = Self {
            params,
            geometry,
            n,
            speed,
            ic,
            amplitude: pick(args.amplitude_k, "amplitude_K", 1.0)?,
            t0: pick(args.t0_k, "T0_K", 0.0)?,
            solver,
            grid,
            t_end: pick(args.t_end_s, "t_end_s", 10.0)?,
            frames,
            safety: pick(args.safety, "safety", aptring_core::fdsolver::DEFAULT_SAFETY)?,
            out_dir: get("out_dir").map(|kv| base_dir.join(&kv.value)),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> CliResult<()> {
        if self.n == 0 {
            return Err(CliError::Config("mode n must be nonzero".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Config(format!("t_end_s must be positive, got {}", self.t_end)));
        }
        if self.frames == 0 {
            return Err(CliError::Config("frames must be at least 1".into()));
        }
        if !self.amplitude.is_finite() || !self.t0.is_finite() {
            return Err(CliError::Config("amplitude and T0 must be finite".into()));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.n as f64 / self.geometry.radius()
    }

    /// Ring speeds; every run command needs exactly one speed form.
    pub fn speeds(&self) -> CliResult<RingSpeeds> {
        self.speed
            .ok_or_else(|| CliError::Config("no ring speed given (use v, v1 with v2, or dv)".into()))?
            .resolve(self.params.coupling_rate(), self.kappa())
    }

    /// Initial field on the scenario grid (or the file's own grid).
    pub fn initial_state(&self) -> CliResult<FieldState> {
        match &self.ic {
            IcSpec::Analytic(ic) => {
                let grid = Grid::new(self.grid, self.geometry.radius())?;
                Ok(ic.build(grid, self.n, self.amplitude).with_reference(self.t0))
            }
            IcSpec::File(path) => {
                let state = FieldState::from_snapshot_csv(&read(path)?)?;
                let r = state.grid.radius();
                if (r - self.geometry.radius()).abs() > 1e-9 * r {
                    return Err(CliError::Config(format!(
                        "{}: radius {r} mm does not match the scenario radius {} mm",
                        path.display(),
                        self.geometry.radius()
                    )));
                }
                Ok(state)
            }
        }
    }
}
