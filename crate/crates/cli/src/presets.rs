//! Figure presets. Each panel is an independent table + plot; a failing
//! panel is reported without stopping the others.

use anyhow::Result;
use ep3_optomech::{
    baseline_n0, baseline_params, cooling_sweep, effective_response, solve_steady_state_with, sweep_spectrum,
    Axis, BaselineDetuning, BranchLabel, CoolingOptions, Grid, StabilityPolicy, SystemParams,
};
use rayon::prelude::*;

use crate::commands::{plot_columns, Artifact, Outcome};
use crate::config::{Preset, Resolved};
use crate::export::{Cell, Table};

type Panel = (String, Result<Artifact>);

pub fn run(preset: Preset, cfg: &Resolved) -> Outcome {
    let panels = match preset {
        Preset::Fig2 => fig2(cfg),
        Preset::Fig3 => fig3(cfg),
        Preset::Fig4 => fig4(cfg),
        Preset::Fig5 => fig5(cfg),
    };
    let mut out = Outcome::default();
    for (name, panel) in panels {
        match panel {
            Ok(a) => out.artifacts.push(a),
            Err(e) => {
                log::error!("panel {name} failed: {e:#}");
                out.failures.push((name, format!("{e:#}")));
            }
        }
    }
    out
}

/// Template with `J = gamma`, the given power and the user's other settings.
fn device(cfg: &Resolved, p_in: f64) -> Result<SystemParams> {
    let p = &cfg.params;
    let gamma = p.gamma();
    Ok(p.with_raw(|r| {
        r.j_rad_s = gamma;
        r.p_in_w = p_in;
    })?)
}

fn label(key: &str, v: f64) -> String {
    format!("{key}={v}")
}

/// Wide table: the grid, then one column per series.
fn wide(x_key: &str, grid: &Grid, series: Vec<(String, Vec<Option<f64>>)>) -> Table {
    let mut columns = vec![x_key.to_string()];
    columns.extend(series.iter().map(|(n, _)| n.clone()));
    let mut t = Table::new(columns);
    for (i, &x) in grid.values().iter().enumerate() {
        let mut row = vec![Cell::Num(x)];
        row.extend(series.iter().map(|(_, v)| Cell::opt(v[i])));
        t.push(row);
    }
    t
}

fn panel(name: &str, table: Table, title: &str, x: &str, y: &str, log_x: bool, log_y: bool) -> Artifact {
    let plot = plot_columns(&table, title, x, y, log_x, log_y);
    Artifact { name: name.to_string(), table, plot: Some(plot) }
}

fn lin(cfg: &Resolved, a: f64, b: f64) -> Result<Grid> {
    Ok(Grid::linspace(a, b, cfg.options.points.max(2))?)
}

fn fig2(cfg: &Resolved) -> Vec<Panel> {
    let mut out = Vec::new();
    let names = [("fig2a", "fig2b"), ("fig2c", "fig2d"), ("fig2e", "fig2f")];
    for (&d, (re_name, im_name)) in [-0.5, -1.0, -1.02].iter().zip(names) {
        let result = (|| -> Result<(Artifact, Artifact)> {
            let template = Axis::DeltaOverOmegaM.apply(&device(cfg, 1e-3)?, d)?;
            let grid = lin(cfg, 0.0, 2.0)?;
            let opts = cfg.options.spectrum(template.gamma());
            let points = sweep_spectrum(&template, Axis::KappaOverGamma, &grid, &opts)?;
            let gamma = template.gamma();
            let part = |re: bool| -> Vec<(String, Vec<Option<f64>>)> {
                [BranchLabel::Plus, BranchLabel::Minus, BranchLabel::Zero]
                    .into_iter()
                    .map(|l| {
                        let v = points
                            .iter()
                            .map(|p| {
                                let w = p.spectrum.omega(l) / gamma;
                                Some(if re { w.re } else { w.im })
                            })
                            .collect();
                        (format!("omega_{}_over_gamma", l.name()), v)
                    })
                    .collect()
            };
            let title = format!("Δ/ω_m = {d}");
            Ok((
                panel(re_name, wide("kappa_over_gamma", &grid, part(true)), &title, "κ/γ", "Re ω/γ", false, false),
                panel(im_name, wide("kappa_over_gamma", &grid, part(false)), &title, "κ/γ", "Im ω/γ", false, false),
            ))
        })();
        match result {
            Ok((a, b)) => {
                out.push((re_name.to_string(), Ok(a)));
                out.push((im_name.to_string(), Ok(b)));
            }
            Err(e) => {
                let msg = format!("{e:#}");
                out.push((re_name.to_string(), Err(anyhow::anyhow!(msg.clone()))));
                out.push((im_name.to_string(), Err(anyhow::anyhow!(msg))));
            }
        }
    }
    out
}

/// `(Omega_eff / omega_m, Gamma_eff / Gamma_m)` along `axis`; undefined
/// where the steady state or the response fails.
fn response_curve(cfg: &Resolved, template: &SystemParams, axis: Axis, grid: &Grid) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let opts = cfg.options.response();
    grid.values()
        .par_iter()
        .map(|&v| {
            let eval = || -> Option<(f64, f64)> {
                let p = axis.apply(template, v).ok()?;
                let s = solve_steady_state_with(&p, cfg.options.branch).ok()?;
                let r = effective_response(&p, &s, &opts).ok()?;
                Some((r.omega_eff / p.omega_m(), r.gamma_eff / p.gamma_m()))
            };
            eval().map_or((None, None), |(a, b)| (Some(a), Some(b)))
        })
        .unzip()
}

fn fig3(cfg: &Resolved) -> Vec<Panel> {
    let powers = [1e-4, 1e-3];
    let cases: [(&str, &str, &str, Axis); 3] = [
        ("fig3a", "fig3b", "single cavity", Axis::DeltaOverOmegaM),
        ("fig3c", "fig3d", "passive-passive", Axis::DeltaOverOmegaM),
        ("fig3e", "fig3f", "active-passive", Axis::KappaOverGamma),
    ];
    let mut out = Vec::new();
    for (freq_name, damp_name, title, axis) in cases {
        let result = (|| -> Result<(Artifact, Artifact)> {
            let grid = match axis {
                Axis::KappaOverGamma => lin(cfg, 0.9, 1.1)?,
                _ => lin(cfg, -2.0, 2.0)?,
            };
            let mut freq = Vec::new();
            let mut damp = Vec::new();
            for &p_in in &powers {
                let base = device(cfg, p_in)?;
                let gamma = base.gamma();
                let template = match title {
                    "single cavity" => base.with_raw(|r| {
                        r.j_rad_s = 0.0;
                        r.kappa_rad_s = 0.0;
                    })?,
                    "passive-passive" => base.with_kappa(-gamma)?,
                    _ => base.with_delta(-base.omega_m())?,
                };
                let (f, d) = response_curve(cfg, &template, axis, &grid);
                freq.push((label("p_in_w", p_in), f));
                damp.push((label("p_in_w", p_in), d));
            }
            let x = axis.label();
            Ok((
                panel(freq_name, wide(axis.key(), &grid, freq), title, x, "Ω_eff/ω_m", false, false),
                panel(damp_name, wide(axis.key(), &grid, damp), title, x, "Γ_eff/Γ_m", false, false),
            ))
        })();
        match result {
            Ok((a, b)) => {
                out.push((freq_name.to_string(), Ok(a)));
                out.push((damp_name.to_string(), Ok(b)));
            }
            Err(e) => {
                let msg = format!("{e:#}");
                out.push((freq_name.to_string(), Err(anyhow::anyhow!(msg.clone()))));
                out.push((damp_name.to_string(), Err(anyhow::anyhow!(msg))));
            }
        }
    }
    out
}

fn formal(cfg: &Resolved) -> CoolingOptions {
    CoolingOptions { policy: StabilityPolicy::Formal, ..cfg.options.cooling() }
}

/// One cooling quantity along `axis` for each template.
fn cooling_series(
    templates: Vec<(String, SystemParams)>,
    axis: Axis,
    grid: &Grid,
    opts: &CoolingOptions,
    pick: fn(&ep3_optomech::CoolingResult) -> Option<f64>,
) -> Result<Vec<(String, Vec<Option<f64>>)>> {
    templates
        .into_iter()
        .map(|(name, t)| {
            let rows = cooling_sweep(&t, &[(axis, grid.clone())], opts)?;
            Ok((name, rows.iter().map(|r| pick(&r.result)).collect()))
        })
        .collect()
}

fn fig4(cfg: &Resolved) -> Vec<Panel> {
    let opts = formal(cfg);
    let mut out: Vec<Panel> = Vec::new();
    let detuning_panel = |name: &str, kappas: &[f64], p_in: f64| -> Result<Artifact> {
        let grid = lin(cfg, -2.0, 2.0)?;
        let base = device(cfg, p_in)?;
        let templates = kappas
            .iter()
            .map(|&k| Ok((label("kappa_over_gamma", k), Axis::KappaOverGamma.apply(&base, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let series = cooling_series(templates, Axis::DeltaOverOmegaM, &grid, &opts, |r| r.beta)?;
        let title = format!("P = {p_in} W");
        Ok(panel(name, wide(Axis::DeltaOverOmegaM.key(), &grid, series), &title, "Δ/ω_m", "β", false, true))
    };
    out.push(("fig4a".into(), detuning_panel("fig4a", &[-1.0, 0.0, 0.5], 1e-4)));
    out.push(("fig4b".into(), detuning_panel("fig4b", &[1.001, 1.01, 1.1, 2.0], 1e-4)));
    out.push(("fig4c".into(), detuning_panel("fig4c", &[1.001, 1.01, 1.1, 2.0], 1e-3)));
    let d = (|| -> Result<Artifact> {
        let grid = lin(cfg, 1.001, 1.1)?;
        let base = device(cfg, 1.2e-4)?;
        let base = base.with_delta(-base.omega_m())?;
        let templates = [300.0, 20.0, 0.65]
            .iter()
            .map(|&t| Ok((label("temperature_k", t), base.with_temperature(t)?)))
            .collect::<Result<Vec<_>>>()?;
        let series = cooling_series(templates, Axis::KappaOverGamma, &grid, &opts, |r| r.n)?;
        Ok(panel("fig4d", wide(Axis::KappaOverGamma.key(), &grid, series), "P = 0.00012 W", "κ/γ", "n", false, true))
    })();
    out.push(("fig4d".into(), d));
    out
}

fn fig5(cfg: &Resolved) -> Vec<Panel> {
    let mut out: Vec<Panel> = Vec::new();
    let a = (|| -> Result<Artifact> {
        let grid = lin(cfg, -2.0, 0.0)?;
        let opts = CoolingOptions { baseline_detuning: BaselineDetuning::Track, baseline_power: None, ..formal(cfg) };
        let mut series = Vec::new();
        for p_in in [1e-5, 1e-4, 1e-3] {
            let base = device(cfg, p_in)?;
            let values: Vec<Option<f64>> = grid
                .values()
                .par_iter()
                .map(|&d| {
                    let p = Axis::DeltaOverOmegaM.apply(&base, d).ok()?;
                    let reference = baseline_params(&p, &opts).ok()?;
                    baseline_n0(&reference, p.temperature(), &opts).ok().map(|b| b.n0)
                })
                .collect();
            series.push((label("p_in_w", p_in), values));
        }
        Ok(panel("fig5a", wide(Axis::DeltaOverOmegaM.key(), &grid, series), "single cavity", "Δ/ω_m", "n_0", false, true))
    })();
    out.push(("fig5a".into(), a));
    let b = (|| -> Result<Artifact> {
        let grid = Grid::logspace(1e-6, 1e-2, cfg.options.points.max(2))?;
        let base = device(cfg, 1e-3)?;
        let base = Axis::KappaOverGamma.apply(&base.with_delta(-base.omega_m())?, 1.001)?;
        let templates = [300.0, 20.0, 0.65]
            .iter()
            .map(|&t| Ok((label("temperature_k", t), base.with_temperature(t)?)))
            .collect::<Result<Vec<_>>>()?;
        let series = cooling_series(templates, Axis::PowerW, &grid, &formal(cfg), |r| r.n)?;
        Ok(panel("fig5b", wide(Axis::PowerW.key(), &grid, series), "κ/γ = 1.001", "P_in (W)", "n", true, true))
    })();
    out.push(("fig5b".into(), b));
    out
}
