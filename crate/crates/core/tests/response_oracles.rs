mod common;

use common::point;
use ep3_optomech::numkernel::multiset_distance;
use ep3_optomech::response::{sample_susceptibility, FIT_SAMPLES};
use ep3_optomech::{
    effective_response, extract_lorentzian, numeric_lorentzian, solve_steady_state, spectrum_exact, stability,
    transfer_matrix, transfer_matrix_single_cavity, BranchLabel, EvalFrequency, ResponseOptions, C64,
};

#[test]
fn decoupled_optics_reproduce_the_supermode_roots() {
    for k in [0.2, 0.9, 1.7] {
        let p = point(k, 1.0, -0.8, 1e-3).with_xi(0.0).unwrap();
        let s = solve_steady_state(&p).unwrap();
        let eig = transfer_matrix(&p, &s).eigenvalues().unwrap();
        let freqs: Vec<C64> = eig.iter().map(|l| C64::new(0.0, -1.0) * l).collect();
        let spec = spectrum_exact(&p, C64::new(0.0, 0.0)).unwrap();
        for label in [BranchLabel::Plus, BranchLabel::Minus] {
            let w = spec.omega(label);
            let err = freqs.iter().map(|f| (f - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(err <= 1e-9 * p.gamma(), "kappa/gamma {k}: {err:e}");
        }
    }
}

#[test]
fn quadrature_and_complex_spectra_agree_when_driven() {
    for (k, j, d, pw) in [(0.5, 1.0, -1.0, 1e-3), (-1.0, 0.3, -0.4, 1e-4), (1.3, 1.5, -1.2, 5e-4)] {
        let p = point(k, j, d, pw);
        let tm = transfer_matrix(&p, &solve_steady_state(&p).unwrap());
        let a = ep3_optomech::numkernel::eigvals_small(tm.scaled_complex()).unwrap();
        let b = ep3_optomech::numkernel::eigvals_small(tm.scaled_quadrature()).unwrap();
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        assert!(multiset_distance(&a, &b).unwrap() <= 1e-9 * scale);
    }
}

#[test]
fn single_cavity_backaction_matches_the_resolvent() {
    let p = point(0.0, 0.0, -1.0, 1e-4);
    let s = solve_steady_state(&p).unwrap();
    let tm = transfer_matrix_single_cavity(&p, &s);
    assert!(stability(&tm).unwrap().stable);
    let fit = numeric_lorentzian(&tm).unwrap();
    let opts = ResponseOptions { eval: EvalFrequency::SelfConsistent, ..Default::default() };
    let r = effective_response(&p, &s, &opts).unwrap();
    assert!((fit.peak / r.omega_eff - 1.0).abs() < 0.01);
    assert!((fit.width / r.gamma_eff - 1.0).abs() < 0.01);
    // Red-detuned single cavity damps the mechanics.
    assert!(r.gamma_eff > p.gamma_m());
}

#[test]
fn compound_stable_point_fit_matches_the_closed_form() {
    let p = point(-0.5, 1.0, -1.0, 1e-4);
    let s = solve_steady_state(&p).unwrap();
    let tm = transfer_matrix(&p, &s);
    assert!(stability(&tm).unwrap().stable);
    let fit = numeric_lorentzian(&tm).unwrap();
    let opts = ResponseOptions { eval: EvalFrequency::SelfConsistent, ..Default::default() };
    let r = effective_response(&p, &s, &opts).unwrap();
    assert!((fit.peak / r.omega_eff - 1.0).abs() < 0.05);
    assert!((fit.width / r.gamma_eff - 1.0).abs() < 0.05);
}

#[test]
fn doubling_sample_density_moves_estimates_less_than_the_reported_error() {
    let p = point(-0.5, 1.0, -1.0, 1e-4);
    let tm = transfer_matrix(&p, &solve_steady_state(&p).unwrap());
    let rough = numeric_lorentzian(&tm).unwrap();
    let (lo, hi) = (rough.peak - 5.0 * rough.width, rough.peak + 5.0 * rough.width);
    let coarse = extract_lorentzian(&sample_susceptibility(&tm, lo, hi, 201).unwrap()).unwrap();
    let fine = extract_lorentzian(&sample_susceptibility(&tm, lo, hi, 401).unwrap()).unwrap();
    assert!((fine.peak - coarse.peak).abs() < coarse.peak_error.max(f64::EPSILON * coarse.peak));
    assert!((fine.width - coarse.width).abs() < coarse.width_error);
    assert!(FIT_SAMPLES > 401);
}

#[test]
fn weak_drive_corrections_are_linear_in_power() {
    let shift = |pw: f64| {
        let p = point(0.5, 1.0, -1.0, pw);
        let r = effective_response(&p, &solve_steady_state(&p).unwrap(), &ResponseOptions::default()).unwrap();
        (r.omega_eff - p.omega_m(), r.gamma_eff - p.gamma_m())
    };
    let (w1, g1) = shift(1e-8);
    let (w2, g2) = shift(2e-8);
    assert!((w2 / w1 - 2.0).abs() < 1e-3, "{}", w2 / w1);
    assert!((g2 / g1 - 2.0).abs() < 1e-3, "{}", g2 / g1);
}

#[test]
fn damping_inverts_across_gain_loss_balance() {
    let g = |k: f64| {
        let p = point(k, 1.0, -1.0, 1e-4);
        let s = solve_steady_state(&p).unwrap();
        ep3_optomech::gamma_eff(&p, &s, p.omega_m(), Default::default()).unwrap()
    };
    assert!(g(0.95) < 0.0);
    assert!(g(1.05) > 0.0);
}
