mod common;

use common::point;
use ep3_optomech::numkernel::{char_poly, eigvals_small, routh_hurwitz_stable};
use ep3_optomech::{
    a_pm, beta, phonon_number, solve_steady_state, stability, transfer_matrix, CoolingOptions, DetuningConvention,
    Grid, PhononLaw, SystemParams, C64,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (-2.0..2.0f64, 0.0..2.0f64, -1.5..0.5f64, -6.0..-3.0f64)
        .prop_map(|(k, j, d, lp)| point(k, j, d, 10f64.powf(lp)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_matrix_has_conjugation_symmetry(p in params()) {
        let s = solve_steady_state(&p).unwrap();
        let tm = transfer_matrix(&p, &s);
        // Swapping each (a, a*) pair and conjugating maps the matrix to itself.
        let swap = |i: usize| if i < 4 { i ^ 1 } else { i };
        for r in 0..6 {
            for c in 0..6 {
                prop_assert_eq!(tm.a_complex[(swap(r), swap(c))], tm.a_complex[(r, c)].conj());
            }
        }
        prop_assert!(tm.a_quadrature.is_real());
        let eig = eigvals_small(tm.scaled_complex()).unwrap();
        for l in &eig {
            let partner = eig.iter().map(|m| (m - l.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-8 * l.norm().max(1.0));
        }
    }

    #[test]
    fn stability_verdicts_agree_off_the_margin(p in params()) {
        let s = solve_steady_state(&p).unwrap();
        let tm = transfer_matrix(&p, &s);
        let report = stability(&tm).unwrap();
        prop_assert_eq!(report.stable, report.max_real_part < 0.0);
        if !report.marginal {
            let coeffs: Vec<f64> = char_poly(tm.scaled_quadrature()).iter().map(|c| c.re).collect();
            prop_assert_eq!(routh_hurwitz_stable(&coeffs).unwrap(), report.stable);
        }
    }

    #[test]
    fn backaction_coefficients_mirror_in_frequency(p in params(), w in 0.0..2.0f64) {
        let s = solve_steady_state(&p).unwrap();
        let omega = w * p.omega_m();
        for conv in [DetuningConvention::Effective, DetuningConvention::Printed] {
            let (plus, _) = a_pm(&p, &s, omega, conv);
            let (_, minus) = a_pm(&p, &s, -omega, conv);
            prop_assert!((plus - minus).abs() <= 1e-12 * plus.abs().max(1.0));
        }
    }

    #[test]
    fn phonon_number_is_linear_in_temperature(t in 0.01..500.0f64, g in 0.1..100.0f64, w in 0.5..2.0f64) {
        let p = SystemParams::default();
        let n1 = phonon_number(&p, w * p.omega_m(), g * p.gamma_m(), t, PhononLaw::Cubic).unwrap();
        let n2 = phonon_number(&p, w * p.omega_m(), g * p.gamma_m(), 2.0 * t, PhononLaw::Cubic).unwrap();
        prop_assert!((n2 / n1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn defined_beta_is_the_phonon_ratio(k in -2.0..0.9f64, d in -1.5..-0.3f64) {
        let r = beta(&point(k, 1.0, d, 1e-4), &CoolingOptions::default());
        if let (Some(n), Some(n0), Some(b)) = (r.n, r.n0, r.beta) {
            prop_assert!((b * n0 - n).abs() <= 1e-12 * n);
            prop_assert!(n > 0.0 && n0 > 0.0);
        }
    }

    #[test]
    fn grids_accept_only_strict_monotone_lists(v in proptest::collection::vec(-10.0..10.0f64, 1..20)) {
        let monotone = v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0]);
        prop_assert_eq!(Grid::new(v).is_ok(), monotone);
    }
}

#[test]
fn eigenvalues_of_a_known_real_matrix_come_in_pairs() {
    let a = ep3_optomech::SmallMatrix::from_real_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![-4.0, -0.1, 0.0],
        vec![0.0, 0.0, -1.0],
    ])
    .unwrap();
    let eig = eigvals_small(&a).unwrap();
    assert!(eig.iter().any(|z| (z - C64::new(-0.05, (4.0f64 - 0.0025).sqrt())).norm() < 1e-12));
}
