//! Phonon numbers, the single-cavity baseline and the enhancement factor `beta = n / n0`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, SystemParams};
use crate::numkernel::NumError;
use crate::response::{
    effective_response, numeric_lorentzian, stability, transfer_matrix, transfer_matrix_single_cavity,
    LorentzianFit, ResponseError, ResponseOptions, StabilityReport,
};
use crate::steady_state::{solve_steady_state_with, BranchSelect, SteadyStateError};
use crate::sweep::{Axis, Grid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoolingError {
    #[error("effective damping is not positive (Gamma_eff = {gamma_eff:e} s^-1)")]
    NotCooling { gamma_eff: f64 },
    #[error("effective frequency is not positive (Omega_eff = {omega_eff:e} rad/s)")]
    NonPositiveFrequency { omega_eff: f64 },
    #[error("configuration is linearly unstable (max Re = {max_real_part:e} rad/s)")]
    Unstable { max_real_part: f64 },
    #[error("a cooling sweep takes one or two axes, got {0}")]
    AxisCount(usize),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Power law of the phonon-number formula in `omega_m / Omega_eff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhononLaw {
    #[default]
    Cubic,
    /// The textbook `n = k_B T Gamma_m / (hbar Omega_eff Gamma_eff)`.
    Linear,
}

/// What to do with linearly unstable points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityPolicy {
    /// Unstable points have no phonon number.
    #[default]
    Strict,
    /// Evaluate the formula anyway and mark the row `unstable_formal`.
    Formal,
}

/// Detuning of the single-cavity reference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineDetuning {
    /// `Delta = -omega_m`.
    #[default]
    RedSideband,
    /// Same detuning as the evaluated point.
    Track,
    /// `Delta = ratio * omega_m`.
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CoolingOptions {
    pub response: ResponseOptions,
    pub law: PhononLaw,
    pub policy: StabilityPolicy,
    pub branch: BranchSelect,
    pub baseline_detuning: BaselineDetuning,
    /// Drive power of the reference, W; `None` uses the evaluated point's power.
    pub baseline_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingStatus {
    Ok,
    UnstableFormal,
    Unstable,
    Amplifying,
    SpringCollapse,
    BaselineUndefined,
    Error,
}

impl CoolingStatus {
    pub fn name(self) -> &'static str {
        match self {
            CoolingStatus::Ok => "ok",
            CoolingStatus::UnstableFormal => "unstable_formal",
            CoolingStatus::Unstable => "unstable",
            CoolingStatus::Amplifying => "amplifying",
            CoolingStatus::SpringCollapse => "spring_collapse",
            CoolingStatus::BaselineUndefined => "baseline_undefined",
            CoolingStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsSnapshot {
    pub kappa_over_gamma: f64,
    pub delta_over_omega_m: f64,
    pub p_in_w: f64,
    pub j_over_gamma: f64,
}

impl ParamsSnapshot {
    pub fn of(p: &SystemParams) -> Self {
        ParamsSnapshot {
            kappa_over_gamma: p.kappa_over_gamma(),
            delta_over_omega_m: p.delta_over_omega_m(),
            p_in_w: p.p_in(),
            j_over_gamma: p.j_over_gamma(),
        }
    }
}

/// One evaluated point. Quantities that are undefined at this point are `None`
/// and `status` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingResult {
    pub n: Option<f64>,
    pub n0: Option<f64>,
    pub beta: Option<f64>,
    pub temperature: f64,
    pub stable: bool,
    pub omega_eff: Option<f64>,
    pub gamma_eff: Option<f64>,
    pub status: CoolingStatus,
    pub reason: Option<String>,
    pub params: ParamsSnapshot,
}

/// `n = (k_B T / hbar omega_m) (Gamma_m / Gamma_eff) (omega_m / Omega_eff)^3`.
pub fn phonon_number(
    params: &SystemParams,
    omega_eff: f64,
    gamma_eff: f64,
    temperature: f64,
    law: PhononLaw,
) -> Result<f64, CoolingError> {
    if gamma_eff <= 0.0 {
        return Err(CoolingError::NotCooling { gamma_eff });
    }
    if omega_eff <= 0.0 {
        return Err(CoolingError::NonPositiveFrequency { omega_eff });
    }
    let wm = params.omega_m();
    let thermal = params.k_b() * temperature / (params.hbar() * wm);
    let damping = params.gamma_m() / gamma_eff;
    Ok(match law {
        PhononLaw::Cubic => thermal * damping * (wm / omega_eff).powi(3),
        PhononLaw::Linear => thermal * damping * (wm / omega_eff),
    })
}

/// The single passive cavity: gain cavity removed (`J = 0`, `kappa = 0`).
pub fn baseline_params(params: &SystemParams, opts: &CoolingOptions) -> Result<SystemParams, ModelError> {
    let wm = params.omega_m();
    let delta = match opts.baseline_detuning {
        BaselineDetuning::RedSideband => -wm,
        BaselineDetuning::Track => params.delta(),
        BaselineDetuning::Ratio(r) => r * wm,
    };
    let power = opts.baseline_power.unwrap_or(params.p_in());
    params.with_raw(|r| {
        r.j_rad_s = 0.0;
        r.kappa_rad_s = 0.0;
        r.delta_rad_s = delta;
        r.p_in_w = power;
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    pub n0: f64,
    pub omega_eff: f64,
    pub gamma_eff: f64,
    pub stability: StabilityReport,
    /// Fit of the four-mode numeric susceptibility, when it could be made.
    pub numeric: Option<LorentzianFit>,
}

/// Phonon number of the single passive cavity at `temperature`.
///
/// `params` must already be the reference configuration (see
/// [`baseline_params`]). Stability is judged on the four-mode system since the
/// removed gain cavity leaves two undamped modes in the full one.
pub fn baseline_n0(params: &SystemParams, temperature: f64, opts: &CoolingOptions) -> Result<Baseline, CoolingError> {
    let state = solve_steady_state_with(params, opts.branch)?;
    let tm = transfer_matrix_single_cavity(params, &state);
    let report = stability(&tm)?;
    if !report.stable && opts.policy == StabilityPolicy::Strict {
        return Err(CoolingError::Unstable { max_real_part: report.max_real_part });
    }
    let response = effective_response(params, &state, &opts.response)?;
    let n0 = phonon_number(params, response.omega_eff, response.gamma_eff, temperature, opts.law)?;
    let numeric = if report.stable { numeric_lorentzian(&tm).ok() } else { None };
    if let Some(fit) = numeric {
        let dw = (fit.peak / response.omega_eff - 1.0).abs();
        let dg = (fit.width / response.gamma_eff - 1.0).abs();
        if dw > 0.05 || dg > 0.05 {
            log::warn!("baseline analytic and numeric response differ (peak {dw:.3}, width {dg:.3} relative)");
        }
    }
    Ok(Baseline { n0, omega_eff: response.omega_eff, gamma_eff: response.gamma_eff, stability: report, numeric })
}

/// Compound-system phonon number without the baseline.
struct Compound {
    n: Option<f64>,
    omega_eff: Option<f64>,
    gamma_eff: Option<f64>,
    stable: bool,
    status: CoolingStatus,
    reason: Option<String>,
}

fn compound(params: &SystemParams, opts: &CoolingOptions) -> Compound {
    let fail = |status, stable, reason: String| Compound {
        n: None,
        omega_eff: None,
        gamma_eff: None,
        stable,
        status,
        reason: Some(reason),
    };
    let state = match solve_steady_state_with(params, opts.branch) {
        Ok(s) => s,
        Err(e) => return fail(CoolingStatus::Error, false, e.to_string()),
    };
    let report = match stability(&transfer_matrix(params, &state)) {
        Ok(r) => r,
        Err(e) => return fail(CoolingStatus::Error, false, e.to_string()),
    };
    if !report.stable && opts.policy == StabilityPolicy::Strict {
        return fail(
            CoolingStatus::Unstable,
            false,
            CoolingError::Unstable { max_real_part: report.max_real_part }.to_string(),
        );
    }
    let response = match effective_response(params, &state, &opts.response) {
        Ok(r) => r,
        Err(e @ ResponseError::NegativeStiffness { .. }) => {
            return fail(CoolingStatus::SpringCollapse, report.stable, e.to_string())
        }
        Err(e) => return fail(CoolingStatus::Error, report.stable, e.to_string()),
    };
    let mut out = Compound {
        n: None,
        omega_eff: Some(response.omega_eff),
        gamma_eff: Some(response.gamma_eff),
        stable: report.stable,
        status: if report.stable { CoolingStatus::Ok } else { CoolingStatus::UnstableFormal },
        reason: None,
    };
    match phonon_number(params, response.omega_eff, response.gamma_eff, params.temperature(), opts.law) {
        Ok(n) => out.n = Some(n),
        Err(e) => {
            out.status = CoolingStatus::Amplifying;
            out.reason = Some(e.to_string());
        }
    }
    out
}

fn assemble(params: &SystemParams, c: Compound, baseline: &Result<f64, String>) -> CoolingResult {
    let (n0, baseline_reason) = match baseline {
        Ok(n0) => (Some(*n0), None),
        Err(e) => (None, Some(e.clone())),
    };
    let mut status = c.status;
    let mut reason = c.reason;
    if status == CoolingStatus::Ok || status == CoolingStatus::UnstableFormal {
        if let Some(r) = baseline_reason {
            status = CoolingStatus::BaselineUndefined;
            reason = Some(r);
        }
    }
    let beta = match (c.n, n0) {
        (Some(n), Some(n0)) if status != CoolingStatus::BaselineUndefined => Some(n / n0),
        _ => None,
    };
    CoolingResult {
        n: c.n,
        n0,
        beta,
        temperature: params.temperature(),
        stable: c.stable,
        omega_eff: c.omega_eff,
        gamma_eff: c.gamma_eff,
        status,
        reason,
        params: ParamsSnapshot::of(params),
    }
}

fn baseline_value(params: &SystemParams, opts: &CoolingOptions) -> Result<f64, String> {
    let reference = baseline_params(params, opts).map_err(|e| e.to_string())?;
    baseline_n0(&reference, params.temperature(), opts).map(|b| b.n0).map_err(|e| e.to_string())
}

/// Full evaluation of one point at `params.temperature()`.
pub fn beta(params: &SystemParams, opts: &CoolingOptions) -> CoolingResult {
    assemble(params, compound(params, opts), &baseline_value(params, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingRow {
    /// One value per sweep axis, in axis order.
    pub axis_values: Vec<f64>,
    pub result: CoolingResult,
}

/// Evaluates the Cartesian product of one or two axis grids (first axis
/// slowest). Rows come back in grid order; failing points are flagged in
/// their status. The baseline is computed once per distinct reference
/// configuration.
pub fn cooling_sweep(
    template: &SystemParams,
    axes: &[(Axis, Grid)],
    opts: &CoolingOptions,
) -> Result<Vec<CoolingRow>, CoolingError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(CoolingError::AxisCount(axes.len()));
    }
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for (_, grid) in axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                grid.values().iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    let params: Vec<SystemParams> = points
        .iter()
        .map(|values| {
            axes.iter()
                .zip(values)
                .try_fold(*template, |p, ((axis, _), &v)| axis.apply(&p, v))
        })
        .collect::<Result<_, _>>()?;

    let key = |p: &SystemParams| -> Result<[u64; 3], ModelError> {
        let r = baseline_params(p, opts)?;
        Ok([r.p_in().to_bits(), r.delta().to_bits(), p.temperature().to_bits()])
    };
    let mut representatives: Vec<([u64; 3], &SystemParams)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for p in &params {
        let k = key(p)?;
        if seen.insert(k) {
            representatives.push((k, p));
        }
    }
    let baselines: HashMap<[u64; 3], Result<f64, String>> = representatives
        .par_iter()
        .map(|(k, p)| (*k, baseline_value(p, opts)))
        .collect();

    let rows = params
        .par_iter()
        .zip(points.par_iter())
        .map(|(p, values)| {
            let baseline = &baselines[&key(p).expect("key computed above")];
            CoolingRow { axis_values: values.clone(), result: assemble(p, compound(p, opts), baseline) }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(kappa_over_gamma: f64, delta_over_wm: f64, p_in: f64) -> SystemParams {
        let p = SystemParams::default();
        p.with_raw(|r| {
            r.kappa_rad_s = kappa_over_gamma * p.gamma();
            r.delta_rad_s = delta_over_wm * p.omega_m();
            r.p_in_w = p_in;
        })
        .unwrap()
    }

    #[test]
    fn bare_mode_occupation() {
        let p = SystemParams::default();
        let n = phonon_number(&p, p.omega_m(), p.gamma_m(), 300.0, PhononLaw::Cubic).unwrap();
        let expect = p.k_b() * 300.0 / (p.hbar() * p.omega_m());
        assert!((n / expect - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_law_scalings() {
        let p = SystemParams::default();
        let (w, g) = (p.omega_m(), 2.0 * p.gamma_m());
        let n = phonon_number(&p, w, g, 300.0, PhononLaw::Cubic).unwrap();
        let n2 = phonon_number(&p, w, 2.0 * g, 300.0, PhononLaw::Cubic).unwrap();
        let n3 = phonon_number(&p, 2.0 * w, g, 300.0, PhononLaw::Cubic).unwrap();
        let n4 = phonon_number(&p, 2.0 * w, g, 300.0, PhononLaw::Linear).unwrap();
        assert!((n / n2 - 2.0).abs() < 1e-14);
        assert!((n / n3 - 8.0).abs() < 1e-13);
        assert!((n / n4 - 2.0).abs() < 1e-13);
        assert_eq!(
            phonon_number(&p, w, -1.0, 300.0, PhononLaw::Cubic),
            Err(CoolingError::NotCooling { gamma_eff: -1.0 })
        );
    }

    #[test]
    fn undriven_baseline_is_thermal() {
        let p = point(0.5, -1.0, 0.0);
        let opts = CoolingOptions::default();
        let b = baseline_n0(&baseline_params(&p, &opts).unwrap(), 300.0, &opts).unwrap();
        let expect = p.k_b() * 300.0 / (p.hbar() * p.omega_m());
        assert_eq!(b.n0, expect);
    }

    #[test]
    fn undriven_compound_has_unit_beta() {
        let r = beta(&point(-1.0, -1.0, 0.0), &CoolingOptions::default());
        assert_eq!(r.status, CoolingStatus::Ok);
        assert_eq!(r.beta, Some(1.0));
    }

    #[test]
    fn strict_policy_flags_gain_above_balance() {
        let r = beta(&point(1.5, -1.0, 1e-4), &CoolingOptions::default());
        assert_eq!(r.status, CoolingStatus::Unstable);
        assert!(r.n.is_none() && r.beta.is_none());
        let formal = beta(&point(1.5, -1.0, 1e-4), &CoolingOptions { policy: StabilityPolicy::Formal, ..Default::default() });
        assert!(!formal.stable);
        assert!(matches!(formal.status, CoolingStatus::UnstableFormal | CoolingStatus::Amplifying));
    }

    #[test]
    fn beta_times_n0_is_n() {
        let r = beta(&point(-0.5, -1.0, 1e-4), &CoolingOptions::default());
        let (n, n0, b) = (r.n.unwrap(), r.n0.unwrap(), r.beta.unwrap());
        assert!((b * n0 - n).abs() <= 1e-12 * n);
    }

    #[test]
    fn sweep_reuses_one_baseline_and_keeps_order() {
        let template = point(-0.5, -1.0, 1e-4);
        let grid = Grid::linspace(-0.9, -0.1, 5).unwrap();
        let rows = cooling_sweep(&template, &[(Axis::KappaOverGamma, grid.clone())], &CoolingOptions::default()).unwrap();
        assert_eq!(rows.len(), 5);
        for (row, v) in rows.iter().zip(grid.values()) {
            assert_eq!(row.axis_values, vec![*v]);
            assert_eq!(row.result.n0, rows[0].result.n0);
        }
        assert!(matches!(
            cooling_sweep(&template, &[], &CoolingOptions::default()),
            Err(CoolingError::AxisCount(0))
        ));
    }

    #[test]
    fn single_point_sweep_equals_beta() {
        let template = point(-0.5, -1.0, 1e-4);
        let grid = Grid::new(vec![-0.7]).unwrap();
        let rows = cooling_sweep(&template, &[(Axis::KappaOverGamma, grid)], &CoolingOptions::default()).unwrap();
        let direct = beta(&template.with_kappa(-0.7 * template.gamma()).unwrap(), &CoolingOptions::default());
        assert_eq!(rows[0].result, direct);
    }
}
