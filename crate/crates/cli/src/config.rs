//! Run configuration: a TOML file plus `--set key=value` overrides, resolved
//! against the built-in device defaults.
//!
//! Keys are flat. `[params]` and `[options]` tables are accepted as plain
//! grouping; grids live under `[sweep]` (or `sweep.<axis>` on the command
//! line) as `"start:stop:points"`, `"start:stop:points:log"`, `"start:stop"`
//! or an explicit array.

use std::fmt;

use ep3_optomech::{
    derive_params, Axis, BaselineDetuning, BranchSelect, CoalescenceMode, CoolingOptions, DetuningConvention,
    EpTolerances, EvalFrequency, GPolicy, Grid, ModelError, PhononLaw, RadicandForm, RawConfig, ResponseOptions,
    SpectrumOptions, StabilityPolicy, SystemParams, C64,
};
use serde::Serialize;
use thiserror::Error;
use toml::Value;

pub const DEFAULT_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown key `{key}`{}", location(.line))]
    UnknownKey { key: String, line: Option<usize> },
    #[error("cannot parse `{key}`{}: {message}", location(.line))]
    Parse { key: String, line: Option<usize>, message: String },
    #[error("{source_name}: {message}")]
    Syntax { source_name: String, message: String },
    #[error("malformed override `{0}`, expected key=value")]
    MalformedOverride(String),
    #[error("`{first}` and `{second}` set the same quantity")]
    Conflict { first: String, second: String },
    #[error("invalid grid for `{key}`: {message}")]
    Grid { key: String, message: String },
    #[error("invalid parameters: {0}")]
    Model(#[from] ModelError),
}

fn location(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

/// Figure-reproduction preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid before the default resolution is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GridSpec {
    Range { start: f64, stop: f64, points: Option<usize>, log: bool },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn resolve(&self, key: &str, default_points: usize) -> Result<Grid, ConfigError> {
        let grid = match self {
            GridSpec::Range { start, stop, points, log } => {
                let n = points.unwrap_or(default_points);
                if n == 0 {
                    return Err(ConfigError::Grid { key: key.into(), message: "needs at least one point".into() });
                }
                if *log {
                    Grid::logspace(*start, *stop, n)
                } else {
                    Grid::linspace(*start, *stop, n)
                }
            }
            GridSpec::List(values) => Grid::new(values.clone()),
        };
        grid.map_err(|e| ConfigError::Grid { key: key.into(), message: e.to_string() })
    }
}

/// Everything besides the physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOptions {
    pub branch: BranchSelect,
    pub convention: DetuningConvention,
    pub eval: EvalFrequency,
    pub law: PhononLaw,
    pub policy: StabilityPolicy,
    /// Fixed coupling `G / gamma`; `None` re-solves the steady state per point.
    pub g_over_gamma: Option<f64>,
    pub radicand: RadicandForm,
    pub baseline_detuning: BaselineDetuning,
    pub baseline_p_in_w: Option<f64>,
    pub tolerances: EpTolerances,
    pub points: usize,
    pub ep_mode: CoalescenceMode,
    /// Write per-point susceptibility traces from `response`.
    pub trace: bool,
    pub preset: Option<Preset>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            branch: BranchSelect::Lowest,
            convention: DetuningConvention::Effective,
            eval: EvalFrequency::Mechanical,
            law: PhononLaw::Cubic,
            policy: StabilityPolicy::Strict,
            g_over_gamma: None,
            radicand: RadicandForm::Coupling,
            baseline_detuning: BaselineDetuning::RedSideband,
            baseline_p_in_w: None,
            tolerances: EpTolerances::default(),
            points: DEFAULT_POINTS,
            ep_mode: CoalescenceMode::Ep2,
            trace: false,
            preset: None,
        }
    }
}

impl RunOptions {
    pub fn response(&self) -> ResponseOptions {
        ResponseOptions { convention: self.convention, eval: self.eval }
    }

    pub fn cooling(&self) -> CoolingOptions {
        CoolingOptions {
            response: self.response(),
            law: self.law,
            policy: self.policy,
            branch: self.branch,
            baseline_detuning: self.baseline_detuning,
            baseline_power: self.baseline_p_in_w,
        }
    }

    pub fn spectrum(&self, gamma: f64) -> SpectrumOptions {
        let g_policy = match self.g_over_gamma {
            Some(g) => GPolicy::Fixed(C64::new(g * gamma, 0.0)),
            None => GPolicy::SelfConsistent(self.branch),
        };
        SpectrumOptions { g_policy, tolerances: self.tolerances }
    }
}

/// Where a value came from, for error context.
#[derive(Debug, Clone)]
struct Origin {
    key: String,
    line: Option<usize>,
}

/// Accumulates settings in the order they are given; later entries win.
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    entries: Vec<(Origin, Value)>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every key of a TOML document. `source_name` labels syntax errors.
    pub fn add_toml(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax { source_name: source_name.into(), message: e.to_string() })?;
        for (key, value) in table {
            match (key.as_str(), value) {
                ("params" | "options", Value::Table(inner)) => {
                    for (k, v) in inner {
                        let line = line_of(text, &k);
                        self.entries.push((Origin { key: k, line }, v));
                    }
                }
                ("sweep", Value::Table(inner)) => {
                    for (k, v) in inner {
                        let line = line_of(text, &k);
                        self.entries.push((Origin { key: format!("sweep.{k}"), line }, v));
                    }
                }
                (_, Value::Table(_)) => {
                    let line = line_of_table(text, &key);
                    return Err(ConfigError::UnknownKey { key, line });
                }
                (_, v) => {
                    let line = line_of(text, &key);
                    self.entries.push((Origin { key, line }, v));
                }
            }
        }
        Ok(())
    }

    /// Adds one `key=value` override. The value is read as a TOML value when
    /// it parses as one and as a bare string otherwise.
    pub fn add_override(&mut self, text: &str) -> Result<(), ConfigError> {
        let (key, raw) = text.split_once('=').ok_or_else(|| ConfigError::MalformedOverride(text.into()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::MalformedOverride(text.into()));
        }
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.entries.push((Origin { key: key.to_string(), line: None }, value));
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        resolve(&self.entries)
    }
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn line_of_table(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| l.trim() == format!("[{key}]")).map(|i| i + 1)
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub raw: RawConfig,
    #[serde(skip)]
    pub params: SystemParams,
    pub options: RunOptions,
    #[serde(skip)]
    pub sweep: Vec<(Axis, Grid)>,
    /// Every resolved setting as `(key, value)` text, in a fixed order.
    pub echo: Vec<(String, String)>,
}

impl Resolved {
    /// Default device with default options and no sweep.
    pub fn defaults() -> Self {
        ConfigBuilder::new().resolve().expect("defaults resolve")
    }
}

const RAW_KEYS: [&str; 14] = [
    "wavelength_m",
    "q_c",
    "radius_m",
    "omega_m_rad_s",
    "mass_kg",
    "q_m",
    "kappa_rad_s",
    "j_rad_s",
    "delta_rad_s",
    "p_in_w",
    "temperature_k",
    "gamma_rad_s",
    "gamma_m_rad_s",
    "xi_rad_per_s_m",
];

fn number(origin: &Origin, value: &Value) -> Result<f64, ConfigError> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(parse_error(origin, format!("expected a number, got {}", describe(other)))),
    }
}

fn count(origin: &Origin, value: &Value) -> Result<usize, ConfigError> {
    match value {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(parse_error(origin, format!("expected a nonnegative integer, got {}", describe(other)))),
    }
}

fn text<'a>(origin: &Origin, value: &'a Value) -> Result<&'a str, ConfigError> {
    match value {
        Value::String(s) => Ok(s),
        other => Err(parse_error(origin, format!("expected a string, got {}", describe(other)))),
    }
}

fn describe(value: &Value) -> String {
    match value {
        Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

fn parse_error(origin: &Origin, message: String) -> ConfigError {
    ConfigError::Parse { key: origin.key.clone(), line: origin.line, message }
}

fn choice<T: Copy>(origin: &Origin, value: &Value, options: &[(&str, T)]) -> Result<T, ConfigError> {
    let s = text(origin, value)?;
    options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        parse_error(origin, format!("expected one of {}, got \"{s}\"", names.join(", ")))
    })
}

fn grid_spec(origin: &Origin, value: &Value) -> Result<GridSpec, ConfigError> {
    match value {
        Value::Array(items) => {
            let values = items.iter().map(|v| number(origin, v)).collect::<Result<Vec<_>, _>>()?;
            Ok(GridSpec::List(values))
        }
        Value::Float(_) | Value::Integer(_) => Ok(GridSpec::List(vec![number(origin, value)?])),
        Value::String(s) => {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            let bad = || parse_error(origin, format!("expected start:stop[:points[:log]], got \"{s}\""));
            if !(2..=4).contains(&parts.len()) {
                return Err(bad());
            }
            let start: f64 = parts[0].parse().map_err(|_| bad())?;
            let stop: f64 = parts[1].parse().map_err(|_| bad())?;
            let points = match parts.get(2) {
                Some(p) => Some(p.parse::<usize>().map_err(|_| bad())?),
                None => None,
            };
            let log = match parts.get(3) {
                None | Some(&"lin") => false,
                Some(&"log") => true,
                Some(_) => return Err(bad()),
            };
            Ok(GridSpec::Range { start, stop, points, log })
        }
        other => Err(parse_error(origin, format!("expected a grid, got {}", describe(other)))),
    }
}

fn resolve(entries: &[(Origin, Value)]) -> Result<Resolved, ConfigError> {
    let mut raw = RawConfig::default();
    let mut options = RunOptions::default();
    let mut relative: [Option<(f64, String)>; 3] = [None, None, None];
    let mut absolute_set: Vec<&str> = Vec::new();
    let mut sweep: Vec<(Axis, String, GridSpec)> = Vec::new();

    for (origin, value) in entries {
        let key = origin.key.as_str();
        if let Some(axis_key) = key.strip_prefix("sweep.") {
            let axis = Axis::from_key(axis_key).ok_or_else(|| ConfigError::UnknownKey {
                key: key.to_string(),
                line: origin.line,
            })?;
            let spec = grid_spec(origin, value)?;
            sweep.retain(|(a, _, _)| *a != axis);
            sweep.push((axis, key.to_string(), spec));
            continue;
        }
        if let Some(field) = RAW_KEYS.iter().find(|k| **k == key) {
            let v = number(origin, value)?;
            set_raw(&mut raw, field, v);
            absolute_set.push(field);
            continue;
        }
        match key {
            "kappa_over_gamma" => relative[0] = Some((number(origin, value)?, key.into())),
            "j_over_gamma" => relative[1] = Some((number(origin, value)?, key.into())),
            "delta_over_omega_m" => relative[2] = Some((number(origin, value)?, key.into())),
            "branch_index" => options.branch = BranchSelect::Index(count(origin, value)?),
            "detuning_convention" => {
                options.convention = choice(
                    origin,
                    value,
                    &[("effective", DetuningConvention::Effective), ("printed", DetuningConvention::Printed)],
                )?
            }
            "eval_frequency" => {
                options.eval = match value {
                    Value::Float(_) | Value::Integer(_) => EvalFrequency::At(number(origin, value)?),
                    _ => choice(
                        origin,
                        value,
                        &[("omega_m", EvalFrequency::Mechanical), ("self_consistent", EvalFrequency::SelfConsistent)],
                    )?,
                }
            }
            "phonon_law" => {
                options.law = choice(origin, value, &[("cubic", PhononLaw::Cubic), ("linear", PhononLaw::Linear)])?
            }
            "stability_policy" => {
                options.policy =
                    choice(origin, value, &[("strict", StabilityPolicy::Strict), ("formal", StabilityPolicy::Formal)])?
            }
            "g_over_gamma" => options.g_over_gamma = Some(number(origin, value)?),
            "radicand_form" => {
                options.radicand =
                    choice(origin, value, &[("coupling", RadicandForm::Coupling), ("printed", RadicandForm::Printed)])?
            }
            "baseline_detuning" => {
                options.baseline_detuning = match value {
                    Value::Float(_) | Value::Integer(_) => BaselineDetuning::Ratio(number(origin, value)?),
                    _ => choice(
                        origin,
                        value,
                        &[("red_sideband", BaselineDetuning::RedSideband), ("track", BaselineDetuning::Track)],
                    )?,
                }
            }
            "baseline_p_in_w" => options.baseline_p_in_w = Some(number(origin, value)?),
            "ep2_tolerance" => options.tolerances.ep2 = number(origin, value)?,
            "ep3_tolerance" => options.tolerances.ep3 = number(origin, value)?,
            "points" => options.points = count(origin, value)?,
            "ep_mode" => {
                options.ep_mode = choice(origin, value, &[("ep2", CoalescenceMode::Ep2), ("ep3", CoalescenceMode::Ep3)])?
            }
            "trace" => {
                options.trace = match value {
                    Value::Boolean(b) => *b,
                    other => return Err(parse_error(origin, format!("expected true or false, got {}", describe(other)))),
                }
            }
            "preset" => {
                let s = text(origin, value)?;
                options.preset = Some(
                    Preset::from_name(s).ok_or_else(|| parse_error(origin, format!("unknown preset \"{s}\"")))?,
                );
            }
            _ => return Err(ConfigError::UnknownKey { key: key.to_string(), line: origin.line }),
        }
    }

    for (rel, abs) in [(0, "kappa_rad_s"), (1, "j_rad_s"), (2, "delta_rad_s")] {
        if let (Some((_, name)), true) = (&relative[rel], absolute_set.contains(&abs)) {
            return Err(ConfigError::Conflict { first: abs.to_string(), second: name.clone() });
        }
    }
    warn_overrides(&absolute_set);

    // The operating point defaults to ratios so it follows any change of
    // the quality factors or the mechanical frequency.
    let gamma = raw.gamma();
    if !absolute_set.contains(&"kappa_rad_s") {
        raw.kappa_rad_s = relative[0].as_ref().map_or(1.0, |r| r.0) * gamma;
    }
    if !absolute_set.contains(&"j_rad_s") {
        raw.j_rad_s = relative[1].as_ref().map_or(1.0, |r| r.0) * gamma;
    }
    if !absolute_set.contains(&"delta_rad_s") {
        raw.delta_rad_s = relative[2].as_ref().map_or(-1.0, |r| r.0) * raw.omega_m_rad_s;
    }
    let params = derive_params(&raw)?;

    let mut grids = Vec::with_capacity(sweep.len());
    for (axis, key, spec) in &sweep {
        grids.push((*axis, spec.resolve(key, options.points)?));
    }

    let echo = echo(&params, &options, &grids);
    for (k, v) in &echo {
        log::info!("{k} = {v}");
    }
    Ok(Resolved { raw, params, options, sweep: grids, echo })
}

fn set_raw(raw: &mut RawConfig, field: &str, v: f64) {
    match field {
        "wavelength_m" => raw.wavelength_m = v,
        "q_c" => raw.q_c = v,
        "radius_m" => raw.radius_m = v,
        "omega_m_rad_s" => raw.omega_m_rad_s = v,
        "mass_kg" => raw.mass_kg = v,
        "q_m" => raw.q_m = v,
        "kappa_rad_s" => raw.kappa_rad_s = v,
        "j_rad_s" => raw.j_rad_s = v,
        "delta_rad_s" => raw.delta_rad_s = v,
        "p_in_w" => raw.p_in_w = v,
        "temperature_k" => raw.temperature_k = v,
        "gamma_rad_s" => raw.gamma_rad_s = Some(v),
        "gamma_m_rad_s" => raw.gamma_m_rad_s = Some(v),
        "xi_rad_per_s_m" => raw.xi_rad_per_s_m = Some(v),
        _ => unreachable!("field list and setter out of sync: {field}"),
    }
}

/// Direct rate overrides silently shadow the inputs they are derived from;
/// say so when both are given.
fn warn_overrides(set: &[&str]) {
    for (direct, sources) in [
        ("gamma_rad_s", &["q_c", "wavelength_m"][..]),
        ("gamma_m_rad_s", &["q_m"][..]),
        ("xi_rad_per_s_m", &["radius_m", "wavelength_m"][..]),
    ] {
        if set.contains(&direct) {
            for s in sources.iter().filter(|s| set.contains(s)) {
                log::warn!("{direct} overrides the value derived from {s}");
            }
        }
    }
}

fn echo(p: &SystemParams, o: &RunOptions, sweep: &[(Axis, Grid)]) -> Vec<(String, String)> {
    let r = p.raw();
    let mut out: Vec<(String, String)> = vec![
        ("wavelength_m", r.wavelength_m),
        ("q_c", r.q_c),
        ("radius_m", r.radius_m),
        ("omega_m_rad_s", r.omega_m_rad_s),
        ("mass_kg", r.mass_kg),
        ("q_m", r.q_m),
        ("kappa_rad_s", r.kappa_rad_s),
        ("j_rad_s", r.j_rad_s),
        ("delta_rad_s", r.delta_rad_s),
        ("p_in_w", r.p_in_w),
        ("temperature_k", r.temperature_k),
        ("omega_c_rad_s", p.omega_c()),
        ("gamma_rad_s", p.gamma()),
        ("gamma_m_rad_s", p.gamma_m()),
        ("xi_rad_per_s_m", p.xi()),
        ("x0_m", p.x0()),
        ("eta_l_per_s", p.eta_l()),
        ("kappa_over_gamma", p.kappa_over_gamma()),
        ("j_over_gamma", p.j_over_gamma()),
        ("delta_over_omega_m", p.delta_over_omega_m()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    let branch = match o.branch {
        BranchSelect::Lowest => "lowest".to_string(),
        BranchSelect::Index(k) => k.to_string(),
    };
    let eval = match o.eval {
        EvalFrequency::Mechanical => "omega_m".to_string(),
        EvalFrequency::SelfConsistent => "self_consistent".to_string(),
        EvalFrequency::At(w) => w.to_string(),
    };
    let baseline = match o.baseline_detuning {
        BaselineDetuning::RedSideband => "red_sideband".to_string(),
        BaselineDetuning::Track => "track".to_string(),
        BaselineDetuning::Ratio(r) => r.to_string(),
    };
    out.extend(
        [
            ("branch_index", branch),
            ("detuning_convention", format!("{:?}", o.convention).to_lowercase()),
            ("eval_frequency", eval),
            ("phonon_law", format!("{:?}", o.law).to_lowercase()),
            ("stability_policy", format!("{:?}", o.policy).to_lowercase()),
            ("g_over_gamma", o.g_over_gamma.map_or("self_consistent".into(), |g| g.to_string())),
            ("radicand_form", format!("{:?}", o.radicand).to_lowercase()),
            ("baseline_detuning", baseline),
            ("baseline_p_in_w", o.baseline_p_in_w.map_or("same".into(), |p| p.to_string())),
            ("ep2_tolerance", o.tolerances.ep2.to_string()),
            ("ep3_tolerance", o.tolerances.ep3.to_string()),
            ("points", o.points.to_string()),
            ("ep_mode", format!("{:?}", o.ep_mode).to_lowercase()),
            ("trace", o.trace.to_string()),
            ("preset", o.preset.map_or("none".into(), |p| p.name().into())),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v)),
    );
    for (axis, grid) in sweep {
        let v = grid.values();
        out.push((
            format!("sweep.{}", axis.key()),
            format!("{} points from {} to {}", v.len(), v[0], v[v.len() - 1]),
        ));
    }
    out
}
