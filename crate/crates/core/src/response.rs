//! Linearized fluctuation dynamics: transfer matrix, stability, the
//! mechanical susceptibility and the effective frequency and damping.
//!
//! Fluctuations obey `du/dt = A u + eta` with the thermal force entering the
//! momentum row. In the frequency domain (`e^{-i w t}`) the displacement
//! response is `dx[w] = chi(w) F[w]` with
//! `1/chi = m [(Omega_eff^2 - w^2) - i w Gamma_eff]`.

use std::f64::consts::SQRT_2;

use serde::Serialize;
use thiserror::Error;

use crate::model::SystemParams;
use crate::numkernel::{
    char_poly, eigvals_small, null_vector, routh_hurwitz_stable, NumError, SmallMatrix, C64,
};
use crate::steady_state::SteadyState;

/// Denominators below this (SI units, s^-4) count as exact degeneracies.
const DENOMINATOR_FLOOR: f64 = 1e-30;
/// Stability margin, in units of `gamma`, below which verdicts are marginal.
const MARGINAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("backaction denominator vanishes at w = {omega:e} rad/s")]
    DivergentDenominator { omega: f64 },
    #[error("effective stiffness is not positive (Omega_eff^2 = {omega_eff_sq:e})")]
    NegativeStiffness { omega_eff_sq: f64 },
    #[error("resolvent is singular at w = {omega:e} rad/s")]
    SingularResolvent { omega: f64 },
    #[error("self-consistent evaluation frequency did not converge in {iterations} iterations")]
    EvalFrequencyNoConvergence { iterations: usize },
    #[error("samples do not bracket a single interior maximum with both half-power points")]
    NoPeakInRange,
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Detuning used inside the backaction coefficients `A_+-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningConvention {
    /// `A_+- = J^2 - kappa gamma - (Delta_bar -+ w)^2`, effective detuning throughout.
    #[default]
    Effective,
    /// `A_+- = (J^2 - kappa gamma - Delta_bar^2 - w^2) +- 2 Delta w`, with the
    /// bare detuning in the cross term.
    Printed,
}

/// Frequency at which the effective frequency and damping are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub enum EvalFrequency {
    /// `w = omega_m`.
    #[default]
    Mechanical,
    /// A fixed frequency, rad/s.
    At(f64),
    /// Fixed point of `w <- Omega_eff(w)` starting from `omega_m`.
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ResponseOptions {
    pub convention: DetuningConvention,
    pub eval: EvalFrequency,
}

/// Linearized dynamics in two bases.
///
/// The complex basis is `(da1, da1*, da2, da2*, dx, dp)`, the real one
/// `(dX1, dY1, dX2, dY2, dx, dp)` with `X = (a + a*)/sqrt2`,
/// `Y = (a - a*)/(i sqrt2)`. Without the gain cavity both drop their first
/// two coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMatrix {
    pub a_complex: SmallMatrix,
    pub a_quadrature: SmallMatrix,
    /// `sqrt2 hbar xi Re a2s`.
    pub r2: f64,
    /// `sqrt2 hbar xi Im a2s`.
    pub i2: f64,
    /// Same matrices after `u -> D u` with `D = diag(1, .., x0, m omega_m x0)`,
    /// divided by `gamma`; entries are O(1).
    scaled_complex: SmallMatrix,
    scaled_quadrature: SmallMatrix,
    gamma: f64,
    x_scale: f64,
    p_scale: f64,
}

impl TransferMatrix {
    pub fn order(&self) -> usize {
        self.a_complex.order()
    }
    fn x_index(&self) -> usize {
        self.order() - 2
    }
    fn p_index(&self) -> usize {
        self.order() - 1
    }
    pub fn scaled_complex(&self) -> &SmallMatrix {
        &self.scaled_complex
    }
    pub fn scaled_quadrature(&self) -> &SmallMatrix {
        &self.scaled_quadrature
    }
    /// Rate unit of the scaled matrices, rad/s.
    pub fn time_scale(&self) -> f64 {
        self.gamma
    }

    /// Eigenvalues of the complex-basis matrix, rad/s.
    pub fn eigenvalues(&self) -> Result<Vec<C64>, NumError> {
        Ok(eigvals_small(&self.scaled_complex)?.into_iter().map(|z| z * self.gamma).collect())
    }
}

/// Linearizes the equations of motion about the steady state.
pub fn transfer_matrix(params: &SystemParams, state: &SteadyState) -> TransferMatrix {
    build_transfer_matrix(params, state, true)
}

/// The passive-cavity-only dynamics `(da2, da2*, dx, dp)`, used for the
/// conventional single-resonator comparison.
pub fn transfer_matrix_single_cavity(params: &SystemParams, state: &SteadyState) -> TransferMatrix {
    build_transfer_matrix(params, state, false)
}

fn build_transfer_matrix(params: &SystemParams, state: &SteadyState, gain_cavity: bool) -> TransferMatrix {
    let (kappa, gamma, j, delta) = (params.kappa(), params.gamma(), params.j(), params.delta());
    let (m, wm, gm, xi, hbar) = (params.mass(), params.omega_m(), params.gamma_m(), params.xi(), params.hbar());
    let db = state.delta_bar;
    let a = state.a2s;
    let i = C64::i();
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let (r2, i2) = (SQRT_2 * hbar * xi * a.re, SQRT_2 * hbar * xi * a.im);

    let mut complex = vec![
        vec![r(kappa) + i * delta, z, -i * j, z, z, z],
        vec![z, r(kappa) - i * delta, z, i * j, z, z],
        vec![-i * j, z, -gamma + i * db, z, i * xi * a, z],
        vec![z, i * j, z, -gamma - i * db, -i * xi * a.conj(), z],
        vec![z, z, z, z, z, r(1.0 / m)],
        vec![z, z, r(hbar * xi) * a.conj(), r(hbar * xi) * a, r(-m * wm * wm), r(-gm)],
    ];
    let mut quadrature = vec![
        vec![kappa, -delta, 0.0, j, 0.0, 0.0],
        vec![delta, kappa, -j, 0.0, 0.0, 0.0],
        vec![0.0, j, -gamma, -db, -SQRT_2 * xi * a.im, 0.0],
        vec![-j, 0.0, db, -gamma, SQRT_2 * xi * a.re, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / m],
        vec![0.0, 0.0, r2, i2, -m * wm * wm, -gm],
    ];
    if !gain_cavity {
        complex.drain(..2);
        complex.iter_mut().for_each(|row| {
            row.drain(..2);
        });
        quadrature.drain(..2);
        quadrature.iter_mut().for_each(|row| {
            row.drain(..2);
        });
    }
    let a_complex = SmallMatrix::from_rows(&complex).expect("finite transfer matrix");
    let a_quadrature = SmallMatrix::from_real_rows(&quadrature).expect("finite transfer matrix");

    let n = a_complex.order();
    let x_scale = params.x0();
    let p_scale = m * wm * x_scale;
    let mut d = vec![1.0; n];
    d[n - 2] = x_scale;
    d[n - 1] = p_scale;
    let scale = |mat: &SmallMatrix| {
        let mut out = mat.clone();
        for row in 0..n {
            for col in 0..n {
                out[(row, col)] = mat[(row, col)] * (d[col] / (d[row] * gamma));
            }
        }
        out
    };
    TransferMatrix {
        scaled_complex: scale(&a_complex),
        scaled_quadrature: scale(&a_quadrature),
        a_complex,
        a_quadrature,
        r2,
        i2,
        gamma,
        x_scale,
        p_scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMethod {
    Eigenvalue,
    RouthHurwitz,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Eigenvalue verdict: every eigenvalue strictly in the left half-plane.
    pub stable: bool,
    /// Largest eigenvalue real part, rad/s.
    pub max_real_part: f64,
    pub method: StabilityMethod,
    /// `|max_real_part|`, rad/s.
    pub margin: f64,
    /// Routh–Hurwitz verdict on the real characteristic polynomial.
    pub routh_hurwitz: Option<bool>,
    /// `|max_real_part| < 1e-6 gamma`: the two methods may legitimately differ.
    pub marginal: bool,
    pub agree: bool,
}

/// Eigenvalue sign test, cross-checked with Routh–Hurwitz on the real
/// quadrature system.
pub fn stability(tm: &TransferMatrix) -> Result<StabilityReport, NumError> {
    let eig = eigvals_small(&tm.scaled_complex)?;
    let max_scaled = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let max_real_part = max_scaled * tm.gamma;
    let stable = max_scaled < 0.0;
    let coeffs: Vec<f64> = char_poly(&tm.scaled_quadrature).iter().map(|c| c.re).collect();
    let routh = routh_hurwitz_stable(&coeffs).ok();
    let marginal = max_scaled.abs() < MARGINAL;
    let method = if routh.is_some() { StabilityMethod::Both } else { StabilityMethod::Eigenvalue };
    let agree = routh.is_none_or(|rh| rh == stable);
    if !agree && !marginal {
        log::warn!("stability verdicts disagree (max Re = {max_real_part:e} rad/s)");
    }
    Ok(StabilityReport {
        stable,
        max_real_part,
        method,
        margin: max_real_part.abs(),
        routh_hurwitz: routh,
        marginal,
        agree,
    })
}

/// Backaction coefficients `(A_+, A_-)` at frequency `omega`.
pub fn a_pm(params: &SystemParams, state: &SteadyState, omega: f64, convention: DetuningConvention) -> (f64, f64) {
    let base = params.j().powi(2) - params.kappa() * params.gamma();
    let db = state.delta_bar;
    match convention {
        DetuningConvention::Effective => (base - (db - omega).powi(2), base - (db + omega).powi(2)),
        DetuningConvention::Printed => {
            let common = base - db * db - omega * omega;
            let cross = 2.0 * params.delta() * omega;
            (common + cross, common - cross)
        }
    }
}

/// The two curly brackets of the effective spring and damping expressions.
fn backaction_brackets(
    params: &SystemParams,
    state: &SteadyState,
    omega: f64,
    convention: DetuningConvention,
) -> Result<(f64, f64), ResponseError> {
    let (kappa, gamma) = (params.kappa(), params.gamma());
    let (a_plus, a_minus) = a_pm(params, state, omega, convention);
    let (bm, bp) = (state.delta_bar + omega, state.delta_bar - omega);
    let kg = kappa - gamma;
    let den_m = a_minus * a_minus + bm * bm * kg * kg;
    let den_p = a_plus * a_plus + bp * bp * kg * kg;
    if den_m.abs() < DENOMINATOR_FLOOR || den_p.abs() < DENOMINATOR_FLOOR {
        return Err(ResponseError::DivergentDenominator { omega });
    }
    let spring = bm * (kappa * kg - a_minus) / den_m + bp * (kappa * kg - a_plus) / den_p;
    let damping = (kappa * a_minus + bm * bm * kg) / den_m + (-kappa * a_plus - bp * bp * kg) / den_p;
    Ok((spring, damping))
}

/// `Omega_eff^2` at frequency `omega`, rad^2/s^2.
pub fn omega_eff_sq(
    params: &SystemParams,
    state: &SteadyState,
    omega: f64,
    convention: DetuningConvention,
) -> Result<f64, ResponseError> {
    let wm2 = params.omega_m().powi(2);
    if state.intensity() == 0.0 {
        return Ok(wm2);
    }
    let (spring, _) = backaction_brackets(params, state, omega, convention)?;
    let c = params.hbar() * params.xi().powi(2) * state.intensity() / params.mass();
    Ok(wm2 + c * spring)
}

pub fn omega_eff(
    params: &SystemParams,
    state: &SteadyState,
    omega: f64,
    convention: DetuningConvention,
) -> Result<f64, ResponseError> {
    let sq = omega_eff_sq(params, state, omega, convention)?;
    if sq <= 0.0 {
        return Err(ResponseError::NegativeStiffness { omega_eff_sq: sq });
    }
    Ok(sq.sqrt())
}

/// Effective damping at frequency `omega`, s^-1.
///
/// The damping bracket carries units of s^-2; it enters divided by the
/// evaluation frequency, which makes `Gamma_eff` a rate and reproduces the
/// standard single-cavity sideband-cooling limit.
pub fn gamma_eff(
    params: &SystemParams,
    state: &SteadyState,
    omega: f64,
    convention: DetuningConvention,
) -> Result<f64, ResponseError> {
    if state.intensity() == 0.0 {
        return Ok(params.gamma_m());
    }
    let (_, damping) = backaction_brackets(params, state, omega, convention)?;
    let c = params.hbar() * params.xi().powi(2) * state.intensity() / params.mass();
    Ok(params.gamma_m() - c * damping / omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseResult {
    pub omega_eff: f64,
    pub omega_eff_sq: f64,
    pub gamma_eff: f64,
    /// Frequency at which the expressions were evaluated, rad/s.
    pub eval_freq: f64,
    pub chi_samples: Option<Vec<(f64, C64)>>,
}

const SELF_CONSISTENT_MAX_ITER: usize = 50;
const SELF_CONSISTENT_TOL: f64 = 1e-8;

/// Effective frequency and damping with the configured evaluation frequency.
pub fn effective_response(
    params: &SystemParams,
    state: &SteadyState,
    opts: &ResponseOptions,
) -> Result<ResponseResult, ResponseError> {
    let conv = opts.convention;
    let eval_freq = match opts.eval {
        EvalFrequency::Mechanical => params.omega_m(),
        EvalFrequency::At(w) => w,
        EvalFrequency::SelfConsistent => {
            let mut w = params.omega_m();
            let mut converged = false;
            for _ in 0..SELF_CONSISTENT_MAX_ITER {
                let next = omega_eff(params, state, w, conv)?;
                let step = (next - w).abs();
                w = next;
                if step <= SELF_CONSISTENT_TOL * w {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(ResponseError::EvalFrequencyNoConvergence {
                    iterations: SELF_CONSISTENT_MAX_ITER,
                });
            }
            w
        }
    };
    let sq = omega_eff_sq(params, state, eval_freq, conv)?;
    if sq <= 0.0 {
        return Err(ResponseError::NegativeStiffness { omega_eff_sq: sq });
    }
    Ok(ResponseResult {
        omega_eff: sq.sqrt(),
        omega_eff_sq: sq,
        gamma_eff: gamma_eff(params, state, eval_freq, conv)?,
        eval_freq,
        chi_samples: None,
    })
}

/// Lorentzian susceptibility with `Omega_eff`, `Gamma_eff` evaluated at
/// `omega` itself.
pub fn susceptibility_analytic(
    params: &SystemParams,
    state: &SteadyState,
    omega: f64,
    convention: DetuningConvention,
) -> Result<C64, ResponseError> {
    let sq = omega_eff_sq(params, state, omega, convention)?;
    let gamma_eff = if omega == 0.0 {
        params.gamma_m()
    } else {
        gamma_eff(params, state, omega, convention)?
    };
    Ok(C64::new(params.mass() * (sq - omega * omega), -params.mass() * omega * gamma_eff).inv())
}

/// Displacement response to a unit force from the full linear system:
/// the `dx` component of `(-i w - A)^-1 e_p`.
pub fn susceptibility_numeric(tm: &TransferMatrix, omega: f64) -> Result<C64, ResponseError> {
    let n = tm.order();
    // In scaled coordinates: dx = x0/(p0 gamma) [(-i w/gamma - A~)^-1]_{x,p}.
    let shifted = tm.scaled_complex.shifted(C64::new(0.0, -omega / tm.gamma)).scaled(C64::new(-1.0, 0.0));
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    rhs[tm.p_index()] = C64::new(1.0, 0.0);
    let v = shifted.solve(&rhs).map_err(|e| match e {
        NumError::Singular => ResponseError::SingularResolvent { omega },
        other => other.into(),
    })?;
    Ok(v[tm.x_index()] * (tm.x_scale / (tm.p_scale * tm.gamma)))
}

/// Peak and full width at half maximum of `|chi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzianFit {
    pub peak: f64,
    pub width: f64,
    /// Change of the estimates when every other sample is dropped.
    pub peak_error: f64,
    pub width_error: f64,
}

/// Fits peak position (parabola through the three samples around the
/// maximum of `log|chi|^2`) and FWHM (bisection for the half-power crossing
/// on each flank, interpolated linearly in `log|chi|^2`).
pub fn extract_lorentzian(samples: &[(f64, C64)]) -> Result<LorentzianFit, ResponseError> {
    let omega: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let log_power: Vec<f64> = samples.iter().map(|s| s.1.norm_sqr().ln()).collect();
    let (peak, width) = fit_once(&omega, &log_power)?;
    let half_omega: Vec<f64> = omega.iter().step_by(2).copied().collect();
    let half_power: Vec<f64> = log_power.iter().step_by(2).copied().collect();
    let (peak_error, width_error) = match fit_once(&half_omega, &half_power) {
        Ok((p, w)) => ((p - peak).abs(), (w - width).abs()),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    Ok(LorentzianFit { peak, width, peak_error, width_error })
}

fn fit_once(omega: &[f64], log_power: &[f64]) -> Result<(f64, f64), ResponseError> {
    let n = omega.len();
    if n < 3 || log_power.iter().any(|v| !v.is_finite()) {
        return Err(ResponseError::NoPeakInRange);
    }
    let top = (0..n).max_by(|&a, &b| log_power[a].total_cmp(&log_power[b])).expect("nonempty");
    if top == 0 || top == n - 1 {
        return Err(ResponseError::NoPeakInRange);
    }
    let (x0, x1, x2) = (omega[top - 1], omega[top], omega[top + 1]);
    let (y0, y1, y2) = (log_power[top - 1], log_power[top], log_power[top + 1]);
    // Vertex of the parabola through three (possibly uneven) points.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    let (peak, peak_log) = if curvature < 0.0 {
        let slope_mid = d01 - curvature * (x1 - x0);
        let vertex = x1 - slope_mid / (2.0 * curvature);
        let v = vertex.clamp(x0, x2);
        (v, y1 + slope_mid * (v - x1) + curvature * (v - x1).powi(2))
    } else {
        (x1, y1)
    };
    let half = peak_log - std::f64::consts::LN_2;

    // Left flank: log_power rises from below `half` to above it on [lo, top].
    let left = crossing(omega, log_power, half, top, false)?;
    let right = crossing(omega, log_power, half, top, true)?;
    Ok((peak, right - left))
}

/// Interpolated half-power crossing on one side of `top`, located by
/// bisection over sample indices.
fn crossing(omega: &[f64], y: &[f64], half: f64, top: usize, right: bool) -> Result<f64, ResponseError> {
    let (mut inside, mut outside) = if right { (top, omega.len() - 1) } else { (top, 0) };
    if y[outside] >= half {
        return Err(ResponseError::NoPeakInRange);
    }
    while inside.abs_diff(outside) > 1 {
        let mid = (inside + outside) / 2;
        if y[mid] >= half {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    let t = (half - y[inside]) / (y[outside] - y[inside]);
    Ok(omega[inside] + t * (omega[outside] - omega[inside]))
}

/// Susceptibility samples on an even grid.
pub fn sample_susceptibility(tm: &TransferMatrix, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, C64)>, ResponseError> {
    (0..n)
        .map(|k| {
            let w = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            susceptibility_numeric(tm, w).map(|chi| (w, chi))
        })
        .collect()
}

/// Points per susceptibility scan.
pub const FIT_SAMPLES: usize = 2001;

/// Mechanical-like eigenvalue: the one whose eigenvector has the largest
/// weight on `(dx, dp)` in scaled coordinates, taken with negative imaginary
/// part. Returns `(Omega, Gamma)` guesses, rad/s.
pub fn mechanical_mode_guess(tm: &TransferMatrix) -> Result<(f64, f64), NumError> {
    let eig = eigvals_small(&tm.scaled_complex)?;
    let (xi, pi) = (tm.x_index(), tm.p_index());
    let weight = |lambda: C64| {
        let v = null_vector(&tm.scaled_complex, lambda);
        let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        (v[xi].norm_sqr() + v[pi].norm_sqr()) / total
    };
    let best = eig
        .iter()
        .copied()
        .filter(|l| l.im <= 0.0)
        .map(|l| (weight(l), l))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, l)| l)
        .unwrap_or(eig[0]);
    Ok((best.im.abs() * tm.gamma, -2.0 * best.re * tm.gamma))
}

/// Lorentzian fit of the numeric susceptibility: a scan over ten guessed
/// linewidths either side of the mechanical mode, refined once around the
/// found peak.
pub fn numeric_lorentzian(tm: &TransferMatrix) -> Result<LorentzianFit, ResponseError> {
    let (omega_g, gamma_g) = mechanical_mode_guess(tm)?;
    let span = gamma_g.abs().max(1e-6 * omega_g);
    let coarse = sample_susceptibility(tm, omega_g - 10.0 * span, omega_g + 10.0 * span, FIT_SAMPLES)?;
    let first = extract_lorentzian(&coarse)?;
    let fine = sample_susceptibility(
        tm,
        first.peak - 5.0 * first.width,
        first.peak + 5.0 * first.width,
        FIT_SAMPLES,
    )?;
    extract_lorentzian(&fine)
}

/// Thermal force spectral density `(Gamma_m / 2 omega_m) w [1 + coth(hbar w / 2 k_B T)]`.
///
/// At `T = 0` the hyperbolic cotangent is 1 for positive frequencies; at
/// `w = 0` the finite-temperature limit `Gamma_m k_B T / (hbar omega_m)` is returned.
pub fn thermal_spectrum(omega: f64, temperature: f64, params: &SystemParams) -> f64 {
    let pre = params.gamma_m() / (2.0 * params.omega_m());
    let (hbar, kb) = (params.hbar(), params.k_b());
    if omega == 0.0 {
        return pre * 2.0 * kb * temperature / hbar;
    }
    let coth = if temperature == 0.0 {
        omega.signum()
    } else {
        let x = hbar * omega / (2.0 * kb * temperature);
        1.0 / x.tanh()
    };
    pre * omega * (1.0 + coth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::multiset_distance;
    use crate::steady_state::solve_steady_state;

    fn point(kappa_over_gamma: f64, j_over_gamma: f64, delta_over_wm: f64, p_in: f64) -> SystemParams {
        let p = SystemParams::default();
        p.with_raw(|r| {
            r.kappa_rad_s = kappa_over_gamma * p.gamma();
            r.j_rad_s = j_over_gamma * p.gamma();
            r.delta_rad_s = delta_over_wm * p.omega_m();
            r.p_in_w = p_in;
        })
        .unwrap()
    }

    #[test]
    fn zero_power_leaves_the_bare_oscillator() {
        let p = point(-1.0, 1.0, -1.0, 0.0);
        let s = solve_steady_state(&p).unwrap();
        let r = effective_response(&p, &s, &ResponseOptions::default()).unwrap();
        assert_eq!(r.omega_eff, p.omega_m());
        assert_eq!(r.gamma_eff, p.gamma_m());
        let tm = transfer_matrix(&p, &s);
        assert_eq!(tm.a_complex[(5, 2)], C64::new(0.0, 0.0));
        assert_eq!(tm.a_complex[(3, 4)], C64::new(0.0, 0.0));
    }

    #[test]
    fn quadrature_matrix_is_the_basis_change_of_the_complex_one() {
        let p = point(0.6, 1.0, -0.8, 1e-4);
        let s = solve_steady_state(&p).unwrap();
        let tm = transfer_matrix(&p, &s);
        let h = 1.0 / SQRT_2;
        let z = C64::new(0.0, 0.0);
        let mut t_rows = vec![vec![z; 6]; 6];
        for k in 0..2 {
            t_rows[2 * k][2 * k] = C64::new(h, 0.0);
            t_rows[2 * k][2 * k + 1] = C64::new(h, 0.0);
            t_rows[2 * k + 1][2 * k] = C64::new(0.0, -h);
            t_rows[2 * k + 1][2 * k + 1] = C64::new(0.0, h);
        }
        t_rows[4][4] = C64::new(1.0, 0.0);
        t_rows[5][5] = C64::new(1.0, 0.0);
        let t = SmallMatrix::from_rows(&t_rows).unwrap();
        let mut tinv_rows = vec![vec![z; 6]; 6];
        for k in 0..2 {
            tinv_rows[2 * k][2 * k] = C64::new(h, 0.0);
            tinv_rows[2 * k][2 * k + 1] = C64::new(0.0, h);
            tinv_rows[2 * k + 1][2 * k] = C64::new(h, 0.0);
            tinv_rows[2 * k + 1][2 * k + 1] = C64::new(0.0, -h);
        }
        tinv_rows[4][4] = C64::new(1.0, 0.0);
        tinv_rows[5][5] = C64::new(1.0, 0.0);
        let tinv = SmallMatrix::from_rows(&tinv_rows).unwrap();
        let transformed = t.matmul(&tm.a_complex).unwrap().matmul(&tinv).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expect = tm.a_quadrature[(r, c)];
                let got = transformed[(r, c)];
                assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0), "({r},{c}) {got} vs {expect}");
            }
        }
        assert!(tm.a_quadrature.is_real());
    }

    #[test]
    fn both_bases_share_the_spectrum() {
        let p = point(0.3, 0.8, -1.0, 3e-4);
        let s = solve_steady_state(&p).unwrap();
        let tm = transfer_matrix(&p, &s);
        let a = eigvals_small(tm.scaled_complex()).unwrap();
        let b = eigvals_small(tm.scaled_quadrature()).unwrap();
        assert!(multiset_distance(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn undriven_passive_pair_is_stable_and_gain_is_not() {
        let passive = point(-1.0, 1.0, -1.0, 0.0);
        let report = stability(&transfer_matrix(&passive, &solve_steady_state(&passive).unwrap())).unwrap();
        assert!(report.stable && report.agree);
        let gain = point(1.5, 0.2, -1.0, 0.0);
        let report = stability(&transfer_matrix(&gain, &solve_steady_state(&gain).unwrap())).unwrap();
        assert!(!report.stable && report.agree);
        assert!(report.max_real_part > 0.0);
    }

    #[test]
    fn backaction_coefficient_symmetries() {
        let p = point(0.4, 1.2, -0.9, 1e-4);
        let s = solve_steady_state(&p).unwrap();
        for conv in [DetuningConvention::Effective, DetuningConvention::Printed] {
            let (ap, am) = a_pm(&p, &s, 0.0, conv);
            assert_eq!(ap, am);
            let w = 0.7 * p.omega_m();
            let (ap, _) = a_pm(&p, &s, w, conv);
            let (_, am_neg) = a_pm(&p, &s, -w, conv);
            assert!((ap - am_neg).abs() <= 1e-12 * ap.abs());
        }
        let bare = point(0.0, 0.0, -0.9, 0.0);
        let s0 = solve_steady_state(&bare).unwrap();
        let w = 0.3 * p.omega_m();
        let d = bare.delta();
        let (ap, am) = a_pm(&bare, &s0, w, DetuningConvention::Printed);
        assert!((ap + (d - w).powi(2)).abs() <= 1e-12 * (d - w).powi(2));
        assert!((am + (d + w).powi(2)).abs() <= 1e-12 * (d + w).powi(2));
    }

    #[test]
    fn single_cavity_sideband_cooling_limit() {
        let p = point(0.0, 0.0, -1.0, 1e-4);
        let s = solve_steady_state(&p).unwrap();
        let w = p.omega_m();
        let g = gamma_eff(&p, &s, w, DetuningConvention::Effective).unwrap();
        let (gm, wm) = (p.gamma(), p.omega_m());
        let c = p.hbar() * p.xi().powi(2) * s.intensity() / p.mass();
        // Exact sideband detuning in the closed form; the static shift moves
        // the cavity slightly so compare loosely.
        let expect = c * gm * (1.0 / (gm * gm) - 1.0 / (4.0 * wm * wm + gm * gm)) / w;
        assert!(g - p.gamma_m() > 0.0);
        assert!(((g - p.gamma_m()) - expect).abs() < 0.01 * expect, "{g} vs {expect}");
    }

    #[test]
    fn bare_oscillator_resolvent() {
        let p = point(-1.0, 1.0, -1.0, 0.0);
        let tm = transfer_matrix(&p, &solve_steady_state(&p).unwrap());
        for w in [0.0, 0.5 * p.omega_m(), p.omega_m(), 1.3 * p.omega_m()] {
            let num = susceptibility_numeric(&tm, w).unwrap();
            let exact = C64::new(p.mass() * (p.omega_m().powi(2) - w * w), -p.mass() * w * p.gamma_m()).inv();
            assert!((num - exact).norm() <= 1e-10 * exact.norm(), "w = {w}");
        }
        let chi0 = susceptibility_analytic(&p, &solve_steady_state(&p).unwrap(), 0.0, DetuningConvention::Effective)
            .unwrap();
        assert!((chi0.re - 1.0 / (p.mass() * p.omega_m().powi(2))).abs() <= 1e-15 * chi0.re);
    }

    #[test]
    fn bare_oscillator_fit() {
        let p = point(-1.0, 1.0, -1.0, 0.0);
        let tm = transfer_matrix(&p, &solve_steady_state(&p).unwrap());
        let fit = numeric_lorentzian(&tm).unwrap();
        assert!((fit.peak / p.omega_m() - 1.0).abs() < 0.01);
        assert!((fit.width / p.gamma_m() - 1.0).abs() < 0.01);
    }

    #[test]
    fn synthetic_lorentzian() {
        let chi = |w: f64| C64::new(1.0 - w * w, -w * 0.01).inv();
        let samples: Vec<(f64, C64)> = (0..2001).map(|k| {
            let w = 0.9 + 0.2 * k as f64 / 2000.0;
            (w, chi(w))
        }).collect();
        let fit = extract_lorentzian(&samples).unwrap();
        assert!((fit.peak - 1.0).abs() < 1e-3);
        assert!((fit.width / 0.01 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn flat_samples_have_no_peak() {
        let samples: Vec<(f64, C64)> = (0..10).map(|k| (k as f64, C64::new(1.0, 0.0))).collect();
        assert_eq!(extract_lorentzian(&samples), Err(ResponseError::NoPeakInRange));
    }

    #[test]
    fn thermal_spectrum_limits() {
        let p = SystemParams::default();
        let w = p.omega_m();
        let cold = thermal_spectrum(w, 0.0, &p);
        assert!((cold - p.gamma_m() * w / p.omega_m()).abs() <= 1e-15 * cold);
        let t = 300.0;
        let hot = thermal_spectrum(w, t, &p);
        let classical = p.gamma_m() / p.omega_m() * p.k_b() * t / p.hbar();
        let x = p.hbar() * w / (p.k_b() * t);
        assert!((hot / classical - 1.0).abs() < x, "{}", hot / classical);
        assert!(thermal_spectrum(w, 301.0, &p) > hot);
    }
}
