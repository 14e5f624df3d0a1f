use std::path::Path;

use aptring_core::diagnostics::{compare as compare_states, comparison_csv, observables_csv, ObservableReport};
use aptring_core::epform::{closed_form_csv, epsilon_window, radius_window, scan_epsilon_window, ClosedFormReport};
use aptring_core::fdsolver::{simulate as run_fd, DtPolicy, NullSink};
use aptring_core::fmt::sci;
use aptring_core::params::v_ep;
use aptring_core::propagator::{evolve, evolve_frames};
use aptring_core::spectrum::{find_ep, spectrum_csv, sweep_spectrum};
use aptring_core::{FieldState, RingSpeeds};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::output::{out_dir, write};
use crate::scenario::{Scenario, ScenarioArgs, Solver, SpeedSpec};
use crate::CommonArgs;

/// Step of the brute-force ε scan printed by `ep-window`.
const SCAN_STEP: f64 = 1e-6;

fn scenario(common: &CommonArgs, args: &ScenarioArgs) -> CliResult<Scenario> {
    Scenario::resolve(common.config.as_deref(), common.params.as_deref(), args)
}

fn target(common: &CommonArgs, sc: &Scenario) -> std::path::PathBuf {
    out_dir(common.out_dir.as_deref(), sc.out_dir.as_deref())
}

pub(crate) fn spectrum(
    common: &CommonArgs,
    args: &ScenarioArgs,
    v_min: f64,
    v_max: Option<f64>,
    steps: usize,
) -> CliResult<()> {
    let sc = scenario(common, args)?;
    let transport = sc.params.transport();
    let kappa = sc.kappa();
    let closed = v_ep(transport.coupling, kappa)?;
    let v_max = v_max.unwrap_or(2.0 * closed);
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    if !(v_max > v_min) {
        return Err(CliError::Usage(format!("--v-max ({v_max}) must exceed --v-min ({v_min})")));
    }
    let samples = sweep_spectrum(kappa, &transport, v_min, v_max, steps)?;
    let bisected = find_ep(kappa, &transport, (0.0, 2.0 * closed))?;
    let path = write(&target(common, &sc), "spectrum.csv", &spectrum_csv(&samples))?;

    println!("v_EP closed form   {} mm/s", sci(closed));
    println!("v_EP bisection     {} mm/s", sci(bisected));
    if let Some(near) = samples
        .iter()
        .min_by(|a, b| (a.v - closed).abs().total_cmp(&(b.v - closed).abs()))
    {
        println!("nearest sample     {} mm/s ({})", sci(near.v), near.report.phase);
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub(crate) fn ep_window(common: &CommonArgs, args: &ScenarioArgs) -> CliResult<()> {
    let sc = scenario(common, args)?;
    let (e_lo, e_hi) = epsilon_window();
    let (s_lo, s_hi) = scan_epsilon_window(SCAN_STEP)?;
    let (r_lo, r_hi) = radius_window(&sc.params.transport(), sc.n)?;
    let text = format!(
        "n                 {}\n\
         epsilon window    {} {}\n\
         epsilon scan      {} {}\n\
         radius window mm  {} {}\n",
        sc.n,
        sci(e_lo),
        sci(e_hi),
        sci(s_lo),
        sci(s_hi),
        sci(r_lo),
        sci(r_hi)
    );
    print!("{text}");
    let path = write(&target(common, &sc), "ep_window.txt", &text)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub(crate) fn closed_form(common: &CommonArgs, args: &ScenarioArgs, amplitude: f64, points: usize) -> CliResult<()> {
    let sc = scenario(common, args)?;
    let transport = sc.params.transport();
    let radius = sc.geometry.radius();
    let report = ClosedFormReport::new(&transport, radius, sc.n, amplitude)?;
    let csv = closed_form_csv(&transport, radius, sc.n, amplitude, points)?;
    let dir = target(common, &sc);
    let summary = report.summary_text();
    write(&dir, "closed_form.csv", &csv)?;
    let path = write(&dir, "closed_form.json", &summary)?;
    print!("{summary}");
    println!("wrote {}", path.parent().unwrap_or(&dir).display());
    Ok(())
}

/// All frames of one run, 0..=frames.
fn trajectory(sc: &Scenario, f0: &FieldState, speeds: RingSpeeds, solver: Solver) -> CliResult<Vec<FieldState>> {
    let transport = sc.params.transport();
    let mut frames = Vec::with_capacity(sc.frames + 1);
    match solver {
        Solver::Spectral => {
            evolve_frames(f0, sc.t_end, sc.frames, speeds, &transport, &mut frames)?;
        }
        Solver::Fd => {
            let policy = DtPolicy::new(sc.safety, sc.frames)?;
            run_fd(f0, sc.t_end, policy, speeds, &transport, &mut frames)?;
        }
    }
    Ok(frames)
}

pub(crate) fn simulate(common: &CommonArgs, args: &ScenarioArgs) -> CliResult<()> {
    let sc = scenario(common, args)?;
    let speeds = sc.speeds()?;
    let f0 = sc.initial_state()?;
    let traj = trajectory(&sc, &f0, speeds, sc.solver)?;
    let dir = target(common, &sc);
    for (k, frame) in traj.iter().enumerate() {
        write(&dir, &format!("snapshots/{}/frame_{k:04}.csv", sc.solver), &frame.to_snapshot_csv())?;
    }
    let report = ObservableReport::from_trajectory(&sc.solver.to_string(), &traj, sc.n.into())?;
    let summary = format!(
        "ring speeds       v1 {} mm/s, v2 {} mm/s\n{}",
        sci(speeds.v1),
        sci(speeds.v2),
        report.summary_text()
    );
    write(&dir, "observables.csv", &observables_csv(std::slice::from_ref(&report)))?;
    write(&dir, "observables.txt", &summary)?;
    print!("{summary}");
    println!("wrote {}", dir.display());
    Ok(())
}

pub(crate) fn compare(common: &CommonArgs, args: &ScenarioArgs) -> CliResult<()> {
    let sc = scenario(common, args)?;
    let speeds = sc.speeds()?;
    let f0 = sc.initial_state()?;
    let transport = sc.params.transport();
    let reference = evolve(&f0, sc.t_end, speeds, &transport)?;
    let policy = DtPolicy::new(sc.safety, 1)?;
    let (fd, _) = run_fd(&f0, sc.t_end, policy, speeds, &transport, &mut NullSink)?;
    emit_comparison(&target(common, &sc), &fd, &reference)
}

pub(crate) fn compare_files(common: &CommonArgs, a: &Path, b: &Path) -> CliResult<()> {
    let load = |p: &Path| -> CliResult<FieldState> {
        let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?;
        Ok(FieldState::from_snapshot_csv(&text)?)
    };
    let dir = out_dir(common.out_dir.as_deref(), None);
    emit_comparison(&dir, &load(a)?, &load(b)?)
}

fn emit_comparison(dir: &Path, a: &FieldState, b: &FieldState) -> CliResult<()> {
    let c = compare_states(a, b)?;
    let path = write(dir, "compare.csv", &comparison_csv(&c))?;
    println!("max relative L-inf  {}", sci(c.max_linf_rel()));
    println!("max absolute L-inf  {} K", sci(c.max_linf_abs()));
    println!("wrote {}", path.display());
    Ok(())
}

const SWEEP_CSV_HEADER: &str = "dv_mm_per_s,v1_mm_per_s,v2_mm_per_s,drift_mm_per_s,drift_fit_residual,secular_decay_rate_per_s";

pub(crate) fn detune_sweep(
    common: &CommonArgs,
    args: &ScenarioArgs,
    dv_min: f64,
    dv_max: f64,
    dv_steps: usize,
) -> CliResult<()> {
    if dv_steps < 2 {
        return Err(CliError::Usage(format!("--dv-steps must be at least 2, got {dv_steps}")));
    }
    if !(dv_max > dv_min) {
        return Err(CliError::Usage(format!("--dv-max ({dv_max}) must exceed --dv-min ({dv_min})")));
    }
    let sc = scenario(common, args)?;
    let coupling = sc.params.coupling_rate();
    let centre = match sc.speed {
        Some(SpeedSpec::Symmetric(v)) => v,
        Some(SpeedSpec::Pair { v1, v2 }) => 0.5 * (v1 + v2),
        Some(SpeedSpec::AtEp | SpeedSpec::Detuned { .. }) | None => v_ep(coupling, sc.kappa())?,
    };
    let f0 = sc.initial_state()?;
    let n = i64::from(sc.n);
    let last = (dv_steps - 1) as f64;
    let rows = (0..dv_steps)
        .into_par_iter()
        .map(|i| -> CliResult<String> {
            let dv = dv_min + (dv_max - dv_min) * i as f64 / last;
            let speeds = RingSpeeds::detuned(centre, dv);
            let traj = trajectory(&sc, &f0, speeds, sc.solver)?;
            let report = ObservableReport::from_trajectory(&sc.solver.to_string(), &traj, n)?;
            Ok(format!(
                "{},{},{},{},{},{}\n",
                sci(dv),
                sci(speeds.v1),
                sci(speeds.v2),
                sci(report.drift.speed),
                sci(report.drift.residual),
                sci(report.secular.rate)
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut csv = format!("{SWEEP_CSV_HEADER}\n");
    csv.extend(rows);
    let path = write(&target(common, &sc), "detune_sweep.csv", &csv)?;
    println!("centre speed {} mm/s, {dv_steps} detunings", sci(centre));
    println!("wrote {}", path.display());
    Ok(())
}
