//! Physical constants, user-facing parameters and the derived rates.
//!
//! All frequencies are angular (rad/s). Quality-factor inputs are converted
//! with `gamma = omega_c / Q_c` and `Gamma_m = omega_m / Q_m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// CODATA 2018 exact or recommended values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
    c: 299_792_458.0,
};

/// Raw parameters as a user supplies them, in SI units.
///
/// `gamma_rad_s`, `gamma_m_rad_s` and `xi_rad_per_s_m` override the values
/// derived from the quality factors and the radius when present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub wavelength_m: f64,
    pub q_c: f64,
    pub radius_m: f64,
    pub omega_m_rad_s: f64,
    pub mass_kg: f64,
    pub q_m: f64,
    /// Gain rate of the first cavity; negative values describe a lossy one.
    pub kappa_rad_s: f64,
    pub j_rad_s: f64,
    /// Laser detuning from the cavity resonance, `omega_L - omega_c`.
    pub delta_rad_s: f64,
    pub p_in_w: f64,
    pub temperature_k: f64,
    pub gamma_rad_s: Option<f64>,
    pub gamma_m_rad_s: Option<f64>,
    pub xi_rad_per_s_m: Option<f64>,
}

impl RawConfig {
    pub fn omega_c(&self) -> f64 {
        2.0 * PI * CONSTANTS.c / self.wavelength_m
    }

    /// Optical loss rate implied by the current inputs (override first).
    pub fn gamma(&self) -> f64 {
        self.gamma_rad_s.unwrap_or_else(|| self.omega_c() / self.q_c)
    }
}

impl Default for RawConfig {
    /// Experimentally achievable values of the two-resonator device:
    /// 1550 nm, `Q_c = 1e6`, 20 um radius, `omega_m = 2 pi 500 MHz`, 10 pg,
    /// `Q_m = 1e3`. The operating point defaults to gain-loss balance with
    /// `J = kappa = gamma`, red-sideband detuning, 1 mW and room temperature.
    fn default() -> Self {
        let mut raw = Self {
            wavelength_m: 1550e-9,
            q_c: 1e6,
            radius_m: 20e-6,
            omega_m_rad_s: 2.0 * PI * 500e6,
            mass_kg: 10e-15,
            q_m: 1e3,
            kappa_rad_s: 0.0,
            j_rad_s: 0.0,
            delta_rad_s: 0.0,
            p_in_w: 1e-3,
            temperature_k: 300.0,
            gamma_rad_s: None,
            gamma_m_rad_s: None,
            xi_rad_per_s_m: None,
        };
        let gamma = raw.gamma();
        raw.kappa_rad_s = gamma;
        raw.j_rad_s = gamma;
        raw.delta_rad_s = -raw.omega_m_rad_s;
        raw
    }
}

/// One failed invariant of a [`RawConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be strictly positive")]
    NonPositiveInput { field: &'static str },
    #[error("invalid {field}: {message}")]
    InvalidInput { field: &'static str, message: String },
}

impl From<Violation> for ModelError {
    fn from(v: Violation) -> Self {
        ModelError::InvalidInput { field: v.field, message: v.message }
    }
}

const STRICTLY_POSITIVE: &str = "must be strictly positive";

/// Every violated invariant of `raw`; empty when the configuration is usable.
pub fn validate(raw: &RawConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |field: &'static str, value: f64, positive: bool| {
        if !value.is_finite() {
            out.push(Violation { field, message: format!("must be finite, got {value}") });
        } else if positive && value <= 0.0 {
            out.push(Violation { field, message: STRICTLY_POSITIVE.to_string() });
        } else if !positive && value < 0.0 {
            out.push(Violation { field, message: format!("must be nonnegative, got {value}") });
        }
    };
    check("wavelength_m", raw.wavelength_m, true);
    check("q_c", raw.q_c, true);
    check("radius_m", raw.radius_m, true);
    check("omega_m_rad_s", raw.omega_m_rad_s, true);
    check("mass_kg", raw.mass_kg, true);
    check("q_m", raw.q_m, true);
    check("j_rad_s", raw.j_rad_s, false);
    check("p_in_w", raw.p_in_w, false);
    check("temperature_k", raw.temperature_k, false);
    if let Some(g) = raw.gamma_rad_s {
        check("gamma_rad_s", g, true);
    }
    if let Some(g) = raw.gamma_m_rad_s {
        check("gamma_m_rad_s", g, true);
    }
    if let Some(x) = raw.xi_rad_per_s_m {
        check("xi_rad_per_s_m", x, false);
    }
    for (field, value) in [("kappa_rad_s", raw.kappa_rad_s), ("delta_rad_s", raw.delta_rad_s)] {
        if !value.is_finite() {
            out.push(Violation { field, message: format!("must be finite, got {value}") });
        }
    }
    out
}

/// Fully resolved parameters: the raw inputs plus every derived rate.
///
/// Instances are only built through [`derive_params`], so the derived fields
/// always match the raw ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    raw: RawConfig,
    omega_c: f64,
    gamma: f64,
    gamma_m: f64,
    xi: f64,
    x0: f64,
    eta_l: f64,
}

/// Resolves derived rates. Direct overrides win over quality factors.
pub fn derive_params(raw: &RawConfig) -> Result<SystemParams, ModelError> {
    if let Some(v) = validate(raw).into_iter().next() {
        return Err(if v.message == STRICTLY_POSITIVE {
            ModelError::NonPositiveInput { field: v.field }
        } else {
            v.into()
        });
    }
    let hbar = CONSTANTS.hbar;
    let omega_c = raw.omega_c();
    let gamma = raw.gamma();
    let gamma_m = raw.gamma_m_rad_s.unwrap_or(raw.omega_m_rad_s / raw.q_m);
    let xi = raw.xi_rad_per_s_m.unwrap_or(omega_c / raw.radius_m);
    let x0 = (hbar / (2.0 * raw.mass_kg * raw.omega_m_rad_s)).sqrt();
    let eta_l = (2.0 * gamma * raw.p_in_w / (hbar * omega_c)).sqrt();
    Ok(SystemParams { raw: *raw, omega_c, gamma, gamma_m, xi, x0, eta_l })
}

impl SystemParams {
    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }
    pub fn hbar(&self) -> f64 {
        CONSTANTS.hbar
    }
    pub fn k_b(&self) -> f64 {
        CONSTANTS.k_b
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    /// Zero-point displacement `sqrt(hbar / (2 m omega_m))`.
    pub fn x0(&self) -> f64 {
        self.x0
    }
    /// Pump rate `sqrt(2 gamma P_in / (hbar omega_c))`.
    pub fn eta_l(&self) -> f64 {
        self.eta_l
    }
    pub fn omega_m(&self) -> f64 {
        self.raw.omega_m_rad_s
    }
    pub fn mass(&self) -> f64 {
        self.raw.mass_kg
    }
    pub fn kappa(&self) -> f64 {
        self.raw.kappa_rad_s
    }
    pub fn j(&self) -> f64 {
        self.raw.j_rad_s
    }
    pub fn delta(&self) -> f64 {
        self.raw.delta_rad_s
    }
    pub fn p_in(&self) -> f64 {
        self.raw.p_in_w
    }
    pub fn temperature(&self) -> f64 {
        self.raw.temperature_k
    }

    pub fn kappa_over_gamma(&self) -> f64 {
        self.kappa() / self.gamma
    }
    pub fn j_over_gamma(&self) -> f64 {
        self.j() / self.gamma
    }
    pub fn delta_over_omega_m(&self) -> f64 {
        self.delta() / self.omega_m()
    }

    /// Rebuilds the parameters after editing the raw inputs.
    pub fn with_raw(&self, edit: impl FnOnce(&mut RawConfig)) -> Result<Self, ModelError> {
        let mut raw = self.raw;
        edit(&mut raw);
        derive_params(&raw)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.kappa_rad_s = kappa)
    }
    pub fn with_j(&self, j: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.j_rad_s = j)
    }
    pub fn with_delta(&self, delta: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.delta_rad_s = delta)
    }
    pub fn with_p_in(&self, p_in: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.p_in_w = p_in)
    }
    pub fn with_temperature(&self, t: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.temperature_k = t)
    }
    pub fn with_xi(&self, xi: f64) -> Result<Self, ModelError> {
        self.with_raw(|r| r.xi_rad_per_s_m = Some(xi))
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        derive_params(&RawConfig::default()).expect("defaults are valid")
    }
}
