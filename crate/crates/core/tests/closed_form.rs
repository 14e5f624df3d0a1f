mod common;

use std::f64::consts::PI;

use aptring_core::epform::{
    chi_squared, epsilon_window, profile_residual, quartic_residual, radius_window, scan_epsilon_window,
    ClosedFormSolution, ExponentVariant,
};
use aptring_core::params::{epsilon_of, Transport};
use common::paper;
use proptest::prelude::*;

fn sample(sol: &ClosedFormSolution, len: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let dz = sol.z_period() / len as f64;
    let f1 = (0..len).map(|j| sol.f1_z(j as f64 * dz)).collect();
    let f2 = (0..len).map(|j| sol.f2_z(j as f64 * dz)).collect();
    (f1, f2, dz)
}

#[test]
fn scan_recovers_epsilon_window() {
    let (lo, hi) = scan_epsilon_window(1e-6).unwrap();
    assert!((lo - 0.8).abs() <= 1e-6, "{lo}");
    assert!((hi - 1.0).abs() <= 1e-6, "{hi}");
    assert_eq!(epsilon_window(), (0.8, 1.0));
}

#[test]
fn f1_satisfies_quartic_equation() {
    let t = paper();
    for r in [20.5, 21.0, 22.0] {
        let sol = ClosedFormSolution::new(&t, r, 1, 1.0, ExponentVariant::OdeConsistent).unwrap();
        let (f1, _, _) = sample(&sol, 64);
        let (res, scale) = quartic_residual(&f1, sol.z_period(), sol.epsilon, sol.epsilon).unwrap();
        assert!(res <= 1e-8 * scale, "R {r}: {res:e} vs {scale:e}");
    }
}

#[test]
fn ode_consistent_f2_solves_its_equation_off_seam() {
    let t = paper();
    for r in [20.5, 21.0, 22.0] {
        let sol = ClosedFormSolution::new(&t, r, 1, 1.0, ExponentVariant::OdeConsistent).unwrap();
        let (f1, f2, dz) = sample(&sol, 4096);
        let res = profile_residual(&f1, &f2, dz, sol.epsilon, sol.epsilon).unwrap();
        assert!(
            res.second_interior_linf() <= 1e-8 * res.second_scale,
            "R {r}: {:e}",
            res.second_interior_linf()
        );
        // the seam itself is a genuine discontinuity of the aperiodic profile
        assert!(res.second_linf() > 1e-3 * res.second_scale);
    }
}

#[test]
fn paper_literal_f2_leaves_a_residual() {
    let t = paper();
    let sol = ClosedFormSolution::new(&t, 21.0, 1, 1.0, ExponentVariant::PaperLiteral).unwrap();
    let (f1, f2, dz) = sample(&sol, 4096);
    let res = profile_residual(&f1, &f2, dz, sol.epsilon, sol.epsilon).unwrap();
    assert!(res.second_interior_linf() > 1e-3 * res.second_scale);
}

#[test]
fn first_equation_residual_is_the_homogeneous_term() {
    let t = paper();
    let sol = ClosedFormSolution::new(&t, 21.0, 1, 1.0, ExponentVariant::OdeConsistent).unwrap();
    let (f1, f2, dz) = sample(&sol, 4096);
    let res = profile_residual(&f1, &f2, dz, sol.epsilon, sol.epsilon).unwrap();
    for j in 2..4094 {
        let z = j as f64 * dz;
        let hom = sol.a2 * (-sol.decay_per_z() * z).exp() * (sol.alpha * z + sol.phi).cos();
        assert!((res.first[j] - sol.epsilon * hom).abs() <= 1e-8 * res.first_scale);
    }
}

#[test]
fn cosine_sine_profile_solves_both_equations() {
    let t = paper();
    let sol = ClosedFormSolution::cosine_sine(&t, 21.0, 1, 1.0).unwrap();
    let (f1, f2, dz) = sample(&sol, 2048);
    let res = profile_residual(&f1, &f2, dz, sol.epsilon, sol.epsilon).unwrap();
    assert!(res.first_linf() <= 1e-8 * res.first_scale);
    assert!(res.second_linf() <= 1e-8 * res.second_scale);
}

#[test]
fn two_frequency_profile_solves_quartic_analytically() {
    for eps in [0.81, 0.86, 0.9, 0.96] {
        let roots = chi_squared(eps, eps);
        let (c1, c2) = roots.chis().unwrap();
        let (a1, b1) = (0.7, 1.0);
        for z in [0.0, 0.4, 3.0, 17.0] {
            let f = a1 * (c1 * z).cos() + b1 * (c2 * z).cos();
            let d2 = -a1 * c1.powi(2) * (c1 * z).cos() - b1 * c2.powi(2) * (c2 * z).cos();
            let d4 = a1 * c1.powi(4) * (c1 * z).cos() + b1 * c2.powi(4) * (c2 * z).cos();
            let r = d4 + (2.0 - eps * eps) * d2 + (1.0 - eps * eps) * f;
            assert!(r.abs() < 1e-14);
        }
    }
}

/// Smooth periodic test profile from a few Fourier coefficients.
fn profile(coeffs: &[f64], len: usize) -> Vec<f64> {
    (0..len)
        .map(|j| {
            let z = 2.0 * PI * j as f64 / len as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * z + 0.3 * k as f64).cos())
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quartic_roots_are_roots(a in 0.0f64..3.0, eps in 0.0f64..2.0) {
        let r = chi_squared(a, eps);
        prop_assert!(r.residuals().iter().all(|&x| x <= 1e-12));
    }

    #[test]
    fn window_scales_with_mode_and_diffusion_length(n in 1i32..6, d in 10.0f64..500.0, hc in 0.01f64..2.0) {
        let t = Transport::new(d, hc).unwrap();
        let (lo1, hi1) = radius_window(&t, 1).unwrap();
        let (lo, hi) = radius_window(&t, n).unwrap();
        prop_assert!((lo - n as f64 * lo1).abs() <= 1e-12 * lo);
        prop_assert!((hi - n as f64 * hi1).abs() <= 1e-12 * hi);
        prop_assert!((epsilon_of(&t, lo, n).unwrap() - 0.8).abs() <= 1e-12);
        prop_assert!((epsilon_of(&t, hi, n).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn residual_respects_pt_mirror(
        c1 in prop::collection::vec(-1.0f64..1.0, 4),
        c2 in prop::collection::vec(-1.0f64..1.0, 4),
        eps in 0.1f64..1.5,
        a in 0.0f64..2.0,
    ) {
        // (f1, f2)(z) ↦ (f2, f1)(−z) swaps the two equations
        let len = 64;
        let dz = 2.0 * PI / len as f64;
        let f1 = profile(&c1, len);
        let f2 = profile(&c2, len);
        let mirror = |f: &[f64]| (0..len).map(|j| f[(len - j) % len]).collect::<Vec<_>>();
        let g1 = mirror(&f2);
        let g2 = mirror(&f1);
        let rf = profile_residual(&f1, &f2, dz, eps, a).unwrap();
        let rg = profile_residual(&g1, &g2, dz, eps, a).unwrap();
        let tol = 1e-12 * rf.first_scale.max(rf.second_scale).max(1.0);
        for j in 0..len {
            prop_assert!((rg.first[j] - rf.second[(len - j) % len]).abs() <= tol);
            prop_assert!((rg.second[j] - rf.first[(len - j) % len]).abs() <= tol);
        }
    }

    #[test]
    fn periodic_phase_closes_the_seam(r in 20.05f64..22.3) {
        let t = paper();
        for v in ExponentVariant::ALL {
            let sol = ClosedFormSolution::new(&t, r, 1, 1.0, v).unwrap();
            match sol.phi_periodic() {
                Ok(phi) => prop_assert!(sol.with_phi(phi).unwrap().seam_gap().value.abs() <= 1e-10),
                Err(e) => prop_assert!(e.is_numerical()),
            }
        }
    }
}
