//! Gain–loss coupled-resonator optomechanics: steady state, supermode
//! spectrum and exceptional points, linear response and cooling.
//!
//! All quantities are SI (rad/s, m, kg, W, K) unless a name says otherwise.

pub mod cooling;
pub mod model;
pub mod numkernel;
pub mod response;
pub mod steady_state;
pub mod supermodes;
pub mod sweep;

pub use cooling::{
    baseline_n0, baseline_params, beta, cooling_sweep, phonon_number, Baseline, BaselineDetuning,
    CoolingError, CoolingOptions, CoolingResult, CoolingRow, CoolingStatus, ParamsSnapshot, PhononLaw,
    StabilityPolicy,
};
pub use model::{derive_params, validate, ModelError, PhysicalConstants, RawConfig, SystemParams, Violation, CONSTANTS};
pub use numkernel::{NumError, SmallMatrix, C64};
pub use response::{
    a_pm, effective_response, extract_lorentzian, gamma_eff, numeric_lorentzian, omega_eff, omega_eff_sq,
    stability, susceptibility_analytic, susceptibility_numeric, thermal_spectrum, transfer_matrix,
    transfer_matrix_single_cavity, DetuningConvention, EvalFrequency, LorentzianFit, ResponseError,
    ResponseOptions, ResponseResult, StabilityReport, TransferMatrix,
};
pub use steady_state::{coupling_g, solve_steady_state, solve_steady_state_with, BranchSelect, SteadyState, SteadyStateError};
pub use supermodes::{
    classify_ep, locate_ep, spectrum_asymptotic, spectrum_exact, splitting, sweep_spectrum, BranchLabel,
    CoalescenceMode, EpClassification, EpLocation, EpRegime, EpTolerances, GPolicy, RadicandForm,
    SpectrumOptions, SpectrumPoint, SplittingResult, SupermodeError, SupermodeSpectrum,
};
pub use sweep::{Axis, Grid, GridError};
