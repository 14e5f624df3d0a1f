mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use aptring_cli::{Scenario, ScenarioArgs, SpeedSpec, EXIT_NUMERICAL, EXIT_USAGE};
use common::{bin, column, run, run_in, tree};

fn out(dir: &Path) -> [&str; 2] {
    ["--out-dir", dir.to_str().unwrap()]
}

fn with_out<'a>(args: &[&'a str], dir: &'a Path) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(out(dir));
    v
}

#[test]
fn spectrum_rejects_single_step() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&with_out(&["spectrum", "--steps", "1"], tmp.path()));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
}

#[test]
fn unparsable_flag_is_usage_error() {
    let o = run(&["spectrum", "--steps", "many"]);
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
}

#[test]
fn fd_refuses_tiny_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&with_out(&["simulate", "--v", "ep", "--solver", "fd", "--grid", "8"], tmp.path()));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
    assert!(String::from_utf8_lossy(&o.stderr).contains("16"));
}

#[test]
fn method_is_an_alias_for_solver() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--v", "ep", "--method", "spectral", "--grid", "32", "--frames", "12"];
    assert!(run(&with_out(&args, tmp.path())).status.success());
    assert!(tmp.path().join("snapshots/spectral/frame_0012.csv").exists());
}

#[test]
fn missing_parameter_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.scenario");
    fs::write(&cfg, "rho = 2700\nc = 900\nk_i = 1\nd = 0.1\nb = 1\n").unwrap();
    let o = run(&with_out(&["ep-window", "--config", cfg.to_str().unwrap()], tmp.path()));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`D`"));
}

#[test]
fn run_without_speed_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&with_out(&["simulate"], tmp.path()));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
}

#[test]
fn empty_mode_is_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let ic = tmp.path().join("zero.csv");
    let mut text = String::from("# t_s = 0\n# radius_mm = 21\n# T0_K = 0\nx_mm,T1_K,T2_K\n");
    for j in 0..32 {
        text.push_str(&format!("{},0,0\n", 2.0 * std::f64::consts::PI * 21.0 * j as f64 / 32.0));
    }
    fs::write(&ic, text).unwrap();
    let o = run(&with_out(&["simulate", "--v", "1", "--ic-file", ic.to_str().unwrap()], tmp.path()));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_NUMERICAL)));
}

#[test]
fn ep_window_scales_with_mode_number() {
    let tmp = tempfile::tempdir().unwrap();
    let window = |n: &str| -> (f64, f64) {
        let o = run(&with_out(&["ep-window", "--n", n], tmp.path()));
        assert!(o.status.success());
        let text = fs::read_to_string(tmp.path().join("ep_window.txt")).unwrap();
        let line = text.lines().find(|l| l.starts_with("radius window")).unwrap();
        let v: Vec<f64> = line.split_whitespace().skip(3).map(|s| s.parse().unwrap()).collect();
        (v[0], v[1])
    };
    let (lo1, hi1) = window("1");
    let (lo3, hi3) = window("3");
    assert!((lo1 - 20.0).abs() < 1e-12 && (hi1 - 500f64.sqrt()).abs() < 1e-12);
    assert!((lo3 - 3.0 * lo1).abs() < 1e-12 * lo3);
    assert!((hi3 - 3.0 * hi1).abs() < 1e-12 * hi3);
}

#[test]
fn spectrum_bifurcates_at_ep_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&with_out(&["spectrum", "--v-max", "8.4", "--steps", "201"], tmp.path()));
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let v: Vec<f64> = column(&csv, "v_mm_per_s").iter().map(|s| s.parse().unwrap()).collect();
    let re: Vec<f64> = column(&csv, "re_omega_plus").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v.len(), 201);
    let first_split = re.iter().position(|r| *r != 0.0).unwrap();
    assert_eq!(first_split, 101);
    assert!((v[100] - 4.2).abs() < 1e-12);
    assert_eq!(column(&csv, "phase")[100], "EXCEPTIONAL");
}

#[test]
fn closed_form_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(&with_out(&["closed-form", "--points", "33"], tmp.path())).status.success());
    let csv = fs::read_to_string(tmp.path().join("closed_form.csv")).unwrap();
    assert!(csv.starts_with("x_mm,f1_K,f2_paper_literal_K,f2_ode_consistent_K\n"));
    assert_eq!(csv.lines().count(), 34);
    let json = fs::read_to_string(tmp.path().join("closed_form.json")).unwrap();
    for key in ["\"epsilon\"", "\"lambda\"", "\"alpha\"", "\"phi_formula_rad\"", "\"phi_periodic_ode_consistent_rad\""] {
        assert!(json.contains(key), "{key}");
    }
}

#[test]
fn simulate_reports_ep_observables() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--v", "ep", "--grid", "64", "--frames", "50"];
    assert!(run(&with_out(&args, tmp.path())).status.success());
    let csv = fs::read_to_string(tmp.path().join("observables.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("ring 2 leads"));
    let rate: f64 = column(&csv, "secular_decay_rate_per_s")[0].parse().unwrap();
    assert!((rate - 0.426_757_369_614_512_44).abs() <= 1e-2 * 0.4268);
    let lag: f64 = column(&csv, "phase_lag_rad")[0].parse().unwrap();
    assert!(lag > 0.0 && lag < std::f64::consts::FRAC_PI_2);
    assert_eq!(tree(&tmp.path().join("snapshots/spectral")).len(), 51);
}

#[test]
fn compare_same_file_is_zero_and_grid_mismatch_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&with_out(&["simulate", "--v", "ep", "--grid", "32", "--frames", "10"], &a)).status.success());
    assert!(run(&with_out(&["simulate", "--v", "ep", "--grid", "64", "--frames", "10"], &b)).status.success());
    let fa = a.join("snapshots/spectral/frame_0010.csv");
    let fb = b.join("snapshots/spectral/frame_0010.csv");
    let (fa, fb) = (fa.to_str().unwrap(), fb.to_str().unwrap());

    let same = tmp.path().join("same");
    assert!(run(&with_out(&["compare", "--files", fa, fa], &same)).status.success());
    let csv = fs::read_to_string(same.join("compare.csv")).unwrap();
    assert!(column(&csv, "linf_abs_K").iter().all(|v| v.parse::<f64>().unwrap() == 0.0));

    let o = run(&with_out(&["compare", "--files", fa, fb], &tmp.path().join("mismatch")));
    assert_eq!(o.status.code(), Some(i32::from(EXIT_USAGE)));
}

#[test]
fn compare_solvers_within_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(&with_out(&["compare", "--v", "ep"], tmp.path())).status.success());
    let csv = fs::read_to_string(tmp.path().join("compare.csv")).unwrap();
    for v in column(&csv, "linf_rel") {
        assert!(v.parse::<f64>().unwrap() <= 1e-3);
    }
}

#[test]
fn detune_sweep_drift_tracks_detuning() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["detune-sweep", "--grid", "64", "--dv-min", "-0.4", "--dv-max", "0.4", "--dv-steps", "5"];
    assert!(run(&with_out(&args, tmp.path())).status.success());
    let csv = fs::read_to_string(tmp.path().join("detune_sweep.csv")).unwrap();
    let dv = column(&csv, "dv_mm_per_s");
    let drift = column(&csv, "drift_mm_per_s");
    for (d, s) in dv.iter().zip(&drift) {
        let (d, s): (f64, f64) = (d.parse().unwrap(), s.parse().unwrap());
        assert!((d - s).abs() <= 1e-9, "dv {d}, drift {s}");
    }
}

#[test]
fn out_dir_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    fs::write(root.join("s.scenario"), "out_dir = from_scenario\n").unwrap();
    let env_dir = root.join("from_env");
    let flag_dir = root.join("from_flag");
    let go = |flag: bool, env: bool| {
        let mut cmd = Command::new(bin());
        cmd.current_dir(root).env_remove("APTRING_OUT");
        cmd.args(["ep-window", "--config", "s.scenario"]);
        if flag {
            cmd.args(["--out-dir", flag_dir.to_str().unwrap()]);
        }
        if env {
            cmd.env("APTRING_OUT", &env_dir);
        }
        assert!(cmd.output().unwrap().status.success());
    };
    go(true, true);
    assert!(flag_dir.join("ep_window.txt").exists() && !env_dir.exists());
    go(false, true);
    assert!(env_dir.join("ep_window.txt").exists());
    go(false, false);
    assert!(root.join("from_scenario/ep_window.txt").exists());
    assert!(run_in(root, &["ep-window"]).status.success());
    assert!(root.join("out/ep_window.txt").exists());
}

#[test]
fn flags_override_scenario_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.scenario");
    fs::write(&cfg, "radius_mm = 22\nv = 4.4\ngrid = 64\nt_end_s = 5\n").unwrap();
    let args = ScenarioArgs {
        radius_mm: Some(21.0),
        dv: Some(0.2),
        ..ScenarioArgs::default()
    };
    let sc = Scenario::resolve(Some(&cfg), None, &args).unwrap();
    assert_eq!(sc.geometry.radius(), 21.0);
    assert_eq!(sc.grid, 64);
    assert_eq!(sc.t_end, 5.0);
    assert_eq!(sc.speed, Some(SpeedSpec::Detuned { dv: 0.2 }));
    let speeds = sc.speeds().unwrap();
    assert!((speeds.v1 - 4.4).abs() < 1e-12 && (speeds.v2 - 4.0).abs() < 1e-12);
}

#[test]
fn scenario_rejects_ambiguous_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        "v = 4.2\ndv = 0.2\n",
        "v1 = 4.2\n",
        "colour = blue\n",
        "params_file = p.params\nD = 100\n",
        "ic = cos-cos\nic_file = x.csv\n",
        "ic = sawtooth\n",
        "solver = implicit\n",
        "n = 0\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = tmp.path().join(format!("c{k}.scenario"));
        fs::write(&cfg, text).unwrap();
        assert!(Scenario::resolve(Some(&cfg), None, &ScenarioArgs::default()).is_err(), "{text}");
    }
}

#[test]
fn params_file_is_resolved_relative_to_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let p = aptring_core::PhysicalParams::paper();
    fs::write(tmp.path().join("paper.params"), p.to_text()).unwrap();
    fs::write(tmp.path().join("s.scenario"), "params_file = paper.params\nv = ep\n").unwrap();
    let sc = Scenario::resolve(Some(&tmp.path().join("s.scenario")), None, &ScenarioArgs::default()).unwrap();
    assert!((sc.params.coupling_rate() - 0.2).abs() < 1e-12);
    assert!((sc.speeds().unwrap().v1 - 4.2).abs() < 1e-12);
}
