//! Mean-field steady state of the driven two-cavity system and the
//! linearized optomechanical coupling `G`.
//!
//! With `I = |a2s|^2` the static displacement is `x_s = hbar xi I / (m omega_m^2)`,
//! and self-consistency of the cavity-2 amplitude gives a real cubic in `I`.

use serde::Serialize;
use thiserror::Error;

use crate::model::SystemParams;
use crate::numkernel::{solve_cubic_cardano, NumError, C64};

/// Tolerance of the "real root" filter, relative to `max(1, |I|)`.
const REAL_ROOT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error("no nonnegative real intensity solves the steady-state cubic")]
    NoPhysicalRoot,
    #[error("kappa + i Delta vanishes; the gain-cavity amplitude is undefined")]
    SingularDenominator,
    #[error("branch index {index} out of range ({count} physical branches)")]
    BranchOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Which physical branch to keep when the intensity cubic has several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BranchSelect {
    /// Smallest intensity, the state reached by ramping the power up from zero.
    #[default]
    Lowest,
    /// Zero-based index into the intensities sorted ascending.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub a1s: C64,
    pub a2s: C64,
    /// Static displacement, m.
    pub x_s: f64,
    /// Static momentum; always zero.
    pub p_s: f64,
    /// Effective detuning `Delta + xi x_s`, rad/s.
    pub delta_bar: f64,
    /// Linearized coupling `a2s xi x0`, rad/s.
    pub g: C64,
    /// Every physical intensity, ascending.
    pub intensities: Vec<f64>,
    pub branch_count: usize,
    pub branch_index: usize,
}

impl SteadyState {
    /// `|a2s|^2`, the intracavity photon number of cavity 2.
    pub fn intensity(&self) -> f64 {
        self.a2s.norm_sqr()
    }
}

/// Descending coefficients `[c3, c2, c1, c0]` of the real cubic in `I`.
///
/// For `xi = 0` the two leading coefficients vanish and the relation is
/// linear.
pub fn intensity_polynomial(params: &SystemParams) -> [f64; 4] {
    let (kappa, gamma, j, delta) = (params.kappa(), params.gamma(), params.j(), params.delta());
    let s = params.hbar() * params.xi().powi(2) / (params.mass() * params.omega_m().powi(2));
    let eta2 = params.eta_l().powi(2);
    // Denominator of a2s is (a - Delta s I) + i (b + kappa s I).
    let a = j * j - kappa * gamma - delta * delta;
    let b = delta * (kappa - gamma);
    let k2 = delta * delta + kappa * kappa;
    [s * s * k2, 2.0 * s * (b * kappa - a * delta), a * a + b * b, -eta2 * k2]
}

pub fn solve_steady_state(params: &SystemParams) -> Result<SteadyState, SteadyStateError> {
    solve_steady_state_with(params, BranchSelect::Lowest)
}

pub fn solve_steady_state_with(
    params: &SystemParams,
    select: BranchSelect,
) -> Result<SteadyState, SteadyStateError> {
    let (kappa, delta) = (params.kappa(), params.delta());
    if kappa == 0.0 && delta == 0.0 {
        return Err(SteadyStateError::SingularDenominator);
    }
    let intensities = physical_intensities(params)?;
    let count = intensities.len();
    let index = match select {
        BranchSelect::Lowest => 0,
        BranchSelect::Index(k) if k < count => k,
        BranchSelect::Index(k) => return Err(SteadyStateError::BranchOutOfRange { index: k, count }),
    };
    let intensity = intensities[index];
    let x_s = displacement(params, intensity);
    let a2s = cavity2_amplitude(params, x_s)?;
    let a1s = C64::i() * params.j() * a2s / C64::new(kappa, delta);
    Ok(SteadyState {
        a1s,
        a2s,
        x_s,
        p_s: 0.0,
        delta_bar: delta + params.xi() * x_s,
        g: coupling_from_amplitude(a2s, params),
        intensities,
        branch_count: count,
        branch_index: index,
    })
}

/// `G = a2s xi x0`, rad/s.
pub fn coupling_g(state: &SteadyState, params: &SystemParams) -> C64 {
    coupling_from_amplitude(state.a2s, params)
}

fn coupling_from_amplitude(a2s: C64, params: &SystemParams) -> C64 {
    a2s * params.xi() * params.x0()
}

fn displacement(params: &SystemParams, intensity: f64) -> f64 {
    params.hbar() * params.xi() * intensity / (params.mass() * params.omega_m().powi(2))
}

/// `a2s` for a given static displacement.
fn cavity2_amplitude(params: &SystemParams, x_s: f64) -> Result<C64, SteadyStateError> {
    let (kappa, gamma, j, delta) = (params.kappa(), params.gamma(), params.j(), params.delta());
    let shift = params.xi() * x_s;
    let denom = C64::new(
        j * j - kappa * gamma - delta * delta - delta * shift,
        delta * kappa - delta * gamma + kappa * shift,
    );
    if denom.norm() == 0.0 {
        return Err(SteadyStateError::SingularDenominator);
    }
    Ok(params.eta_l() * C64::new(-delta, kappa) / denom)
}

/// Nonnegative real roots of the intensity cubic, ascending and polished.
fn physical_intensities(params: &SystemParams) -> Result<Vec<f64>, SteadyStateError> {
    if params.eta_l() == 0.0 {
        return Ok(vec![0.0]);
    }
    let c = intensity_polynomial(params);
    let mut roots: Vec<f64> = if c[0] == 0.0 {
        if c[2] == 0.0 {
            return Err(SteadyStateError::NoPhysicalRoot);
        }
        vec![-c[3] / c[2]]
    } else {
        let cubic = solve_cubic_cardano(
            C64::new(c[1] / c[0], 0.0),
            C64::new(c[2] / c[0], 0.0),
            C64::new(c[3] / c[0], 0.0),
        )?;
        cubic
            .roots
            .iter()
            .filter(|r| r.im.abs() <= REAL_ROOT_TOL * r.re.abs().max(1.0))
            .map(|r| polish_real_root(&c, r.re))
            .collect()
    };
    roots.retain(|&r| r >= 0.0);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()));
    if roots.is_empty() {
        return Err(SteadyStateError::NoPhysicalRoot);
    }
    Ok(roots)
}

fn polish_real_root(c: &[f64; 4], mut x: f64) -> f64 {
    for _ in 0..3 {
        let f = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
        let df = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
        if df == 0.0 || f == 0.0 {
            break;
        }
        let next = x - f / df;
        let f_next = ((c[0] * next + c[1]) * next + c[2]) * next + c[3];
        if f_next.abs() >= f.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Right-hand sides of the noise-free equations of motion at the state,
/// each divided by its natural scale. The first two are normalized by
/// `max(eta_L, gamma |a2s|)`, the momentum equation by the radiation force.
pub fn equation_residuals(params: &SystemParams, state: &SteadyState) -> [f64; 4] {
    let i = C64::i();
    let (kappa, gamma, j, delta) = (params.kappa(), params.gamma(), params.j(), params.delta());
    let r1 = C64::new(kappa, delta) * state.a1s - i * j * state.a2s;
    let r2 = (-gamma + i * (delta + params.xi() * state.x_s)) * state.a2s - i * j * state.a1s
        - i * params.eta_l();
    let force = params.hbar() * params.xi() * state.intensity();
    let spring = params.mass() * params.omega_m().powi(2) * state.x_s;
    let r4 = force - spring;
    let drive = params.eta_l().max(gamma * state.a2s.norm());
    let field_scale = if drive > 0.0 { drive } else { 1.0 };
    let force_scale = force.abs().max(spring.abs()).max(f64::MIN_POSITIVE);
    [
        r1.norm() / field_scale,
        r2.norm() / field_scale,
        state.p_s.abs(),
        r4.abs() / force_scale,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa_over_gamma: f64, p_in: f64) -> SystemParams {
        let p = SystemParams::default();
        p.with_raw(|r| {
            r.kappa_rad_s = kappa_over_gamma * p.gamma();
            r.p_in_w = p_in;
        })
        .unwrap()
    }

    #[test]
    fn zero_power_is_the_empty_cavity() {
        let p = params(1.0, 0.0);
        let c = intensity_polynomial(&p);
        assert_eq!(c[3], 0.0);
        let s = solve_steady_state(&p).unwrap();
        assert_eq!(s.a1s, C64::new(0.0, 0.0));
        assert_eq!(s.a2s, C64::new(0.0, 0.0));
        assert_eq!(s.x_s, 0.0);
        assert_eq!(s.g, C64::new(0.0, 0.0));
    }

    #[test]
    fn no_backaction_gives_the_linear_relation() {
        let p = params(0.5, 1e-3).with_xi(0.0).unwrap();
        let c = intensity_polynomial(&p);
        assert_eq!((c[0], c[1]), (0.0, 0.0));
        let s = solve_steady_state(&p).unwrap();
        assert_eq!(s.x_s, 0.0);
        let (k, g, j, d) = (p.kappa(), p.gamma(), p.j(), p.delta());
        let expect = p.eta_l() * C64::new(-d, k) / C64::new(j * j - k * g - d * d, d * k - d * g);
        assert!((s.a2s - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn balanced_point_has_one_physical_root() {
        let p = params(1.0, 1e-3);
        let s = solve_steady_state(&p).unwrap();
        assert_eq!(s.branch_count, 1);
    }

    #[test]
    fn residuals_vanish_below_gain_balance() {
        let p = params(0.5, 1e-3);
        let s = solve_steady_state(&p).unwrap();
        for r in equation_residuals(&p, &s) {
            assert!(r < 1e-8, "{r:e}");
        }
        assert!(s.x_s > 0.0);
    }

    #[test]
    fn gain_cavity_relation() {
        let p = params(0.7, 2e-4);
        let s = solve_steady_state(&p).unwrap();
        let expect = C64::i() * p.j() * s.a2s / C64::new(p.kappa(), p.delta());
        assert!((s.a1s - expect).norm() <= 1e-10 * s.a1s.norm());
    }

    #[test]
    fn singular_gain_denominator() {
        let p = params(0.0, 1e-3).with_delta(0.0).unwrap();
        assert_eq!(solve_steady_state(&p), Err(SteadyStateError::SingularDenominator));
    }

    #[test]
    fn coupling_phase_follows_amplitude() {
        let p = params(0.5, 1e-3);
        let mut s = solve_steady_state(&p).unwrap();
        s.a2s = C64::new(3.0, 0.0);
        assert_eq!(coupling_g(&s, &p).arg(), 0.0);
        s.a2s = C64::new(0.0, 0.0);
        assert_eq!(coupling_g(&s, &p), C64::new(0.0, 0.0));
    }

    #[test]
    fn coupling_scales_as_root_power() {
        let lo = solve_steady_state(&params(0.5, 1e-6)).unwrap();
        let hi = solve_steady_state(&params(0.5, 4e-6)).unwrap();
        let ratio = hi.g.norm() / lo.g.norm();
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn out_of_range_branch() {
        let p = params(0.5, 1e-3);
        assert!(matches!(
            solve_steady_state_with(&p, BranchSelect::Index(5)),
            Err(SteadyStateError::BranchOutOfRange { index: 5, .. })
        ));
    }
}
