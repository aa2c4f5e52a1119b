mod common;

use common::point;
use ep3_optomech::{
    locate_ep, spectrum_exact, sweep_spectrum, Axis, CoalescenceMode, GPolicy, Grid, SpectrumOptions, C64,
};

#[test]
fn tracked_branches_move_continuously() {
    let template = point(0.0, 1.0, -1.0, 1e-3);
    let grid = Grid::linspace(0.0, 3.0, 301).unwrap();
    let points = sweep_spectrum(&template, Axis::KappaOverGamma, &grid, &SpectrumOptions::default()).unwrap();
    assert_eq!(points.len(), 301);
    let gamma = template.gamma();
    for pair in points.windows(2) {
        for k in 0..3 {
            let step = (pair[1].spectrum.omegas[k] - pair[0].spectrum.omegas[k]).norm();
            assert!(step < 0.2 * gamma, "jump {:e} at kappa/gamma {}", step / gamma, pair[1].value);
        }
    }
}

#[test]
fn undriven_sideband_point_is_a_triple_coalescence() {
    let p = point(1.0, 1.0, -1.0, 0.0);
    let s = spectrum_exact(&p, C64::new(0.0, 0.0)).unwrap();
    assert_eq!(s.max_separation(), 0.0);
    let opts = SpectrumOptions { g_policy: GPolicy::Fixed(C64::new(0.0, 0.0)), ..Default::default() };
    let loc = locate_ep(&p, Axis::KappaOverGamma, (0.5, 1.5), CoalescenceMode::Ep3, &opts).unwrap();
    assert!((loc.value - 1.0).abs() < 1e-6);
    assert_eq!(loc.classification.order, 3);
}

#[test]
fn coupling_splits_the_triple_point() {
    let p = point(1.0, 1.0, -1.0, 0.0);
    let weak = spectrum_exact(&p, C64::new(1e-3 * p.gamma(), 0.0)).unwrap();
    let strong = spectrum_exact(&p, C64::new(1e-2 * p.gamma(), 0.0)).unwrap();
    assert!(weak.max_separation() > 0.0);
    assert!(strong.max_separation() > weak.max_separation());
}
