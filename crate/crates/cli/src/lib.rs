//! `aptring` command-line interface.
//!
//! Output files go to `--out-dir`, else `$APTRING_OUT`, else the scenario's
//! `out_dir`, else `./out`. Exit status is 0 on success, 2 for usage and
//! configuration errors, 3 for numerical failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod output;
pub mod scenario;

pub use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_USAGE};
pub use output::OUT_ENV;
pub use scenario::{Scenario, ScenarioArgs, Solver, SpeedSpec};

#[derive(Debug, Parser)]
#[command(name = "aptring", version, about = "Exceptional-point analysis of counter-rotating coupled rings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Scenario file (`key = value`)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Physical parameter file; overrides parameters in the scenario
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Output directory
    #[arg(long = "out-dir", env = OUT_ENV, global = true)]
    pub out_dir: Option<PathBuf>,
}

/// Ring radius and mode for the analytic commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ModeArgs {
    /// Inner ring radius R [mm]
    #[arg(long = "radius-mm")]
    pub radius_mm: Option<f64>,
    /// Mode number n
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i32>,
}

impl ModeArgs {
    fn scenario_args(&self) -> ScenarioArgs {
        ScenarioArgs {
            radius_mm: self.radius_mm,
            n: self.n,
            ..ScenarioArgs::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenfrequencies against ring speed
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// First speed of the sweep [mm/s]
        #[arg(long = "v-min", allow_negative_numbers = true, default_value_t = 0.0)]
        v_min: f64,
        /// Last speed of the sweep [mm/s] (default: twice the EP speed)
        #[arg(long = "v-max", allow_negative_numbers = true)]
        v_max: Option<f64>,
        /// Number of sweep points (at least 2)
        #[arg(long, default_value_t = 201)]
        steps: usize,
    },
    /// Epsilon and radius windows for spatial Rabi oscillations
    EpWindow {
        #[command(flatten)]
        common: CommonArgs,
        /// Mode number n
        #[arg(long, allow_negative_numbers = true)]
        n: Option<i32>,
    },
    /// Closed-form EP profiles and phase checks
    ClosedForm {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Initial amplitude A [K]
        #[arg(long = "amplitude-k", allow_negative_numbers = true, default_value_t = 1.0)]
        amplitude_k: f64,
        /// Samples along the ring, both ends included
        #[arg(long, default_value_t = 513)]
        points: usize,
    },
    /// Run one solver and extract observables
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Compare the two solvers, or two snapshot files
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Compare two snapshot CSVs instead (second is the reference)
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        files: Option<Vec<PathBuf>>,
    },
    /// Drift velocity against detuning around a centre speed
    DetuneSweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long = "dv-min", allow_negative_numbers = true, default_value_t = -0.5)]
        dv_min: f64,
        #[arg(long = "dv-max", allow_negative_numbers = true, default_value_t = 0.5)]
        dv_max: f64,
        /// Number of detuning values (at least 2)
        #[arg(long = "dv-steps", default_value_t = 11)]
        dv_steps: usize,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum {
            common,
            mode,
            v_min,
            v_max,
            steps,
        } => commands::spectrum(&common, &mode.scenario_args(), v_min, v_max, steps),
        Command::EpWindow { common, n } => commands::ep_window(
            &common,
            &ScenarioArgs {
                n,
                ..ScenarioArgs::default()
            },
        ),
        Command::ClosedForm {
            common,
            mode,
            amplitude_k,
            points,
        } => commands::closed_form(&common, &mode.scenario_args(), amplitude_k, points),
        Command::Simulate { common, scenario } => commands::simulate(&common, &scenario),
        Command::Compare {
            common,
            scenario,
            files,
        } => match files {
            Some(paths) => commands::compare_files(&common, &paths[0], &paths[1]),
            None => commands::compare(&common, &scenario),
        },
        Command::DetuneSweep {
            common,
            scenario,
            dv_min,
            dv_max,
            dv_steps,
        } => commands::detune_sweep(&common, &scenario, dv_min, dv_max, dv_steps),
    }
}
