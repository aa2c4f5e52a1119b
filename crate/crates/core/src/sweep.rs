//! Sweep axes and monotone parameter grids shared by the sweep engines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SystemParams};

/// A scalar parameter that a sweep varies. Ratios are taken against the
/// template's `gamma` and `omega_m`, which the swept values never change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    KappaOverGamma,
    DeltaOverOmegaM,
    JOverGamma,
    PowerW,
    TemperatureK,
}

impl Axis {
    pub const ALL: [Axis; 5] = [
        Axis::KappaOverGamma,
        Axis::DeltaOverOmegaM,
        Axis::JOverGamma,
        Axis::PowerW,
        Axis::TemperatureK,
    ];

    /// Column / key name.
    pub fn key(self) -> &'static str {
        match self {
            Axis::KappaOverGamma => "kappa_over_gamma",
            Axis::DeltaOverOmegaM => "delta_over_omega_m",
            Axis::JOverGamma => "j_over_gamma",
            Axis::PowerW => "p_in_w",
            Axis::TemperatureK => "temperature_k",
        }
    }

    /// Human-readable axis label for plots.
    pub fn label(self) -> &'static str {
        match self {
            Axis::KappaOverGamma => "κ/γ",
            Axis::DeltaOverOmegaM => "Δ/ω_m",
            Axis::JOverGamma => "J/γ",
            Axis::PowerW => "P_in (W)",
            Axis::TemperatureK => "T (K)",
        }
    }

    pub fn from_key(key: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.key() == key)
    }

    pub fn value_of(self, p: &SystemParams) -> f64 {
        match self {
            Axis::KappaOverGamma => p.kappa_over_gamma(),
            Axis::DeltaOverOmegaM => p.delta_over_omega_m(),
            Axis::JOverGamma => p.j_over_gamma(),
            Axis::PowerW => p.p_in(),
            Axis::TemperatureK => p.temperature(),
        }
    }

    pub fn apply(self, p: &SystemParams, value: f64) -> Result<SystemParams, ModelError> {
        match self {
            Axis::KappaOverGamma => p.with_kappa(value * p.gamma()),
            Axis::DeltaOverOmegaM => p.with_delta(value * p.omega_m()),
            Axis::JOverGamma => p.with_j(value * p.gamma()),
            Axis::PowerW => p.with_p_in(value),
            Axis::TemperatureK => p.with_temperature(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid is empty")]
    Empty,
    #[error("grid value {index} is not finite")]
    NonFinite { index: usize },
    #[error("grid is not monotone at index {index}")]
    NotMonotone { index: usize },
    #[error("logarithmic grid needs positive endpoints")]
    NonPositiveLog,
}

/// Nonempty, finite, strictly monotone list of axis values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self, GridError> {
        if values.is_empty() {
            return Err(GridError::Empty);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        if values.len() > 1 {
            let increasing = values[1] > values[0];
            if let Some(i) = values
                .windows(2)
                .position(|w| if increasing { w[1] <= w[0] } else { w[1] >= w[0] })
            {
                return Err(GridError::NotMonotone { index: i + 1 });
            }
        }
        Ok(Grid(values))
    }

    /// `n` evenly spaced values from `a` to `b` inclusive; the endpoints are
    /// reproduced exactly.
    pub fn linspace(a: f64, b: f64, n: usize) -> Result<Self, GridError> {
        if n == 1 {
            return Self::new(vec![a]);
        }
        let values = (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        Self::new(values)
    }

    /// `n` logarithmically spaced values from `a` to `b` inclusive.
    pub fn logspace(a: f64, b: f64, n: usize) -> Result<Self, GridError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(GridError::NonPositiveLog);
        }
        let lin = Self::linspace(a.ln(), b.ln(), n)?;
        let mut values: Vec<f64> = lin.0.iter().map(|x| x.exp()).collect();
        values[0] = a;
        if n > 1 {
            values[n - 1] = b;
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
