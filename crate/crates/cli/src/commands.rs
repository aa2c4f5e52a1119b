//! Subcommand implementations. Each returns named tables (and optional
//! plots); writing them out is the caller's job.

use anyhow::{bail, Context, Result};
use ep3_optomech::response::{mechanical_mode_guess, sample_susceptibility};
use ep3_optomech::supermodes::EpRegime;
use ep3_optomech::{
    beta, cooling_sweep, effective_response, locate_ep, solve_steady_state_with, splitting, stability,
    sweep_spectrum, transfer_matrix, Axis, BranchLabel, CoolingResult, Grid, ModelError, SpectrumPoint,
    SystemParams,
};
use rayon::prelude::*;

use crate::config::Resolved;
use crate::export::{Cell, Table};
use crate::svg::{Plot, Series};

/// One named output: a table, optionally with a plot of it.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub table: Table,
    pub plot: Option<Plot>,
}

impl Artifact {
    pub fn table(name: impl Into<String>, table: Table) -> Self {
        Artifact { name: name.into(), table, plot: None }
    }
}

/// Result of a command: artifacts plus any parts that failed outright.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failures: Vec<(String, String)>,
}

impl Outcome {
    fn single(a: Artifact) -> Self {
        Outcome { artifacts: vec![a], failures: Vec::new() }
    }
}

/// Every grid point of the Cartesian product, first axis slowest.
pub fn grid_points(template: &SystemParams, axes: &[(Axis, Grid)]) -> Vec<(Vec<f64>, Result<SystemParams, ModelError>)> {
    let mut coords: Vec<Vec<f64>> = vec![Vec::new()];
    for (_, grid) in axes {
        coords = coords
            .into_iter()
            .flat_map(|prefix| {
                grid.values().iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    coords
        .into_par_iter()
        .map(|c| {
            let p = c
                .iter()
                .zip(axes)
                .try_fold(*template, |p, (&v, (axis, _))| axis.apply(&p, v));
            (c, p)
        })
        .collect()
}

fn axis_columns(axes: &[(Axis, Grid)]) -> Vec<String> {
    axes.iter().map(|(a, _)| a.key().to_string()).collect()
}

fn at_most(axes: &[(Axis, Grid)], n: usize, command: &str) -> Result<()> {
    if axes.len() > n {
        bail!("`{command}` takes at most {n} sweep axis, got {}", axes.len());
    }
    Ok(())
}

pub fn spectrum(cfg: &Resolved) -> Result<Outcome> {
    at_most(&cfg.sweep, 1, "spectrum")?;
    Ok(Outcome::single(Artifact::table("spectrum", spectrum_table(cfg, &cfg.params, &cfg.sweep)?)))
}

fn spectrum_table(cfg: &Resolved, template: &SystemParams, axes: &[(Axis, Grid)]) -> Result<Table> {
    let (axis, grid) = match axes.first() {
        Some((a, g)) => (*a, g.clone()),
        None => (Axis::KappaOverGamma, Grid::new(vec![template.kappa_over_gamma()])?),
    };
    let opts = cfg.options.spectrum(template.gamma());
    let points = sweep_spectrum(template, axis, &grid, &opts).context("spectrum sweep failed")?;
    let mut columns = axis_columns(axes);
    columns.extend(
        [
            "g_re", "g_im", "plus_re", "plus_im", "minus_re", "minus_im", "zero_re", "zero_im", "ep_order",
            "min_separation", "max_separation", "regime", "split_omega", "split_gamma",
        ]
        .map(String::from),
    );
    let mut table = Table::new(columns);
    for pt in &points {
        let p = axis.apply(template, pt.value)?;
        let mut row: Vec<Cell> = if axes.is_empty() { vec![] } else { vec![Cell::Num(pt.value)] };
        row.extend(spectrum_cells(pt));
        let regime = EpRegime::of(&p);
        let split = splitting(&p, pt.g, regime, cfg.options.radicand);
        row.extend([Cell::text(regime.name()), Cell::Num(split.delta_omega), Cell::Num(split.delta_gamma)]);
        table.push(row);
    }
    Ok(table)
}

fn spectrum_cells(pt: &SpectrumPoint) -> Vec<Cell> {
    let mut cells = vec![Cell::Num(pt.g.re), Cell::Num(pt.g.im)];
    for label in [BranchLabel::Plus, BranchLabel::Minus, BranchLabel::Zero] {
        let w = pt.spectrum.omega(label);
        cells.extend([Cell::Num(w.re), Cell::Num(w.im)]);
    }
    cells.extend([
        Cell::Int(pt.classification.order as i64),
        Cell::Num(pt.classification.min_separation),
        Cell::Num(pt.classification.max_separation),
    ]);
    cells
}

pub fn steady_state(cfg: &Resolved) -> Result<Outcome> {
    at_most(&cfg.sweep, 2, "steady-state")?;
    let mut columns = axis_columns(&cfg.sweep);
    columns.extend(
        [
            "branch_count", "branch_index", "intensity", "x_s", "delta_bar", "g_re", "g_im", "a1_re", "a1_im",
            "a2_re", "a2_im", "status",
        ]
        .map(String::from),
    );
    let mut table = Table::new(columns);
    let rows: Vec<Vec<Cell>> = grid_points(&cfg.params, &cfg.sweep)
        .into_par_iter()
        .map(|(coords, p)| {
            let mut row: Vec<Cell> = coords.iter().map(|&v| Cell::Num(v)).collect();
            match p.map_err(|e| e.to_string()).and_then(|p| {
                solve_steady_state_with(&p, cfg.options.branch).map_err(|e| e.to_string())
            }) {
                Ok(s) => row.extend([
                    Cell::Int(s.branch_count as i64),
                    Cell::Int(s.branch_index as i64),
                    Cell::Num(s.intensity()),
                    Cell::Num(s.x_s),
                    Cell::Num(s.delta_bar),
                    Cell::Num(s.g.re),
                    Cell::Num(s.g.im),
                    Cell::Num(s.a1s.re),
                    Cell::Num(s.a1s.im),
                    Cell::Num(s.a2s.re),
                    Cell::Num(s.a2s.im),
                    Cell::text("ok"),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(Cell::Undefined, 11));
                    row.push(Cell::Text(e));
                }
            }
            row
        })
        .collect();
    table.rows = rows;
    Ok(Outcome::single(Artifact::table("steady_state", table)))
}

struct ResponseRow {
    cells: Vec<Cell>,
    trace: Option<Table>,
}

fn response_point(cfg: &Resolved, p: &SystemParams) -> std::result::Result<(Vec<Cell>, Option<Table>), String> {
    let state = solve_steady_state_with(p, cfg.options.branch).map_err(|e| e.to_string())?;
    let tm = transfer_matrix(p, &state);
    let report = stability(&tm).map_err(|e| e.to_string())?;
    let trace = if cfg.options.trace {
        let (omega, width) = mechanical_mode_guess(&tm).map_err(|e| e.to_string())?;
        let span = 10.0 * width.abs().max(1e-6 * omega);
        let n = cfg.options.points.max(2);
        let samples = sample_susceptibility(&tm, (omega - span).max(0.0), omega + span, n).map_err(|e| e.to_string())?;
        let mut t = Table::new(["omega", "chi_re", "chi_im", "chi_abs2"]);
        for (w, chi) in samples {
            t.push(vec![Cell::Num(w), Cell::Num(chi.re), Cell::Num(chi.im), Cell::Num(chi.norm_sqr())]);
        }
        Some(t)
    } else {
        None
    };
    let stab = [Cell::Bool(report.stable), Cell::Num(report.max_real_part)];
    let cells = match effective_response(p, &state, &cfg.options.response()) {
        Ok(r) => {
            let mut c = vec![Cell::Num(r.omega_eff), Cell::Num(r.gamma_eff), Cell::Num(r.eval_freq)];
            c.extend(stab);
            c.push(Cell::text("ok"));
            c
        }
        Err(e) => {
            let mut c = vec![Cell::Undefined; 3];
            c.extend(stab);
            c.push(Cell::Text(e.to_string()));
            c
        }
    };
    Ok((cells, trace))
}

pub fn response(cfg: &Resolved) -> Result<Outcome> {
    at_most(&cfg.sweep, 2, "response")?;
    Ok(response_outcome(cfg, &cfg.params, &cfg.sweep))
}

fn response_outcome(cfg: &Resolved, template: &SystemParams, axes: &[(Axis, Grid)]) -> Outcome {
    let mut columns = axis_columns(axes);
    columns.extend(["omega_eff", "gamma_eff", "eval_freq", "stable", "max_real_part", "status"].map(String::from));
    let rows: Vec<ResponseRow> = grid_points(template, axes)
        .into_par_iter()
        .map(|(coords, p)| {
            let mut cells: Vec<Cell> = coords.iter().map(|&v| Cell::Num(v)).collect();
            match p.map_err(|e| e.to_string()).and_then(|p| response_point(cfg, &p)) {
                Ok((c, trace)) => {
                    cells.extend(c);
                    ResponseRow { cells, trace }
                }
                Err(e) => {
                    cells.extend(std::iter::repeat_n(Cell::Undefined, 5));
                    cells.push(Cell::Text(e));
                    ResponseRow { cells, trace: None }
                }
            }
        })
        .collect();
    let mut table = Table::new(columns);
    let mut outcome = Outcome::default();
    for (i, row) in rows.into_iter().enumerate() {
        table.push(row.cells);
        if let Some(t) = row.trace {
            outcome.artifacts.push(Artifact::table(format!("chi_{i}"), t));
        }
    }
    outcome.artifacts.insert(0, Artifact::table("response", table));
    outcome
}

pub fn cooling(cfg: &Resolved) -> Result<Outcome> {
    Ok(Outcome::single(Artifact::table("cooling", cooling_table(cfg, &cfg.params, &cfg.sweep)?)))
}

pub fn cooling_columns(axes: &[(Axis, Grid)]) -> Vec<String> {
    let mut columns = axis_columns(axes);
    columns.extend(
        ["omega_eff", "gamma_eff", "n", "n0", "beta", "stable", "status", "reason"].map(String::from),
    );
    columns
}

pub fn cooling_cells(r: &CoolingResult) -> Vec<Cell> {
    vec![
        Cell::opt(r.omega_eff),
        Cell::opt(r.gamma_eff),
        Cell::opt(r.n),
        Cell::opt(r.n0),
        Cell::opt(r.beta),
        Cell::Bool(r.stable),
        Cell::text(r.status.name()),
        r.reason.clone().map_or(Cell::text(""), Cell::Text),
    ]
}

fn cooling_table(cfg: &Resolved, template: &SystemParams, axes: &[(Axis, Grid)]) -> Result<Table> {
    let opts = cfg.options.cooling();
    let mut table = Table::new(cooling_columns(axes));
    if axes.is_empty() {
        table.push(cooling_cells(&beta(template, &opts)));
        return Ok(table);
    }
    for row in cooling_sweep(template, axes, &opts)? {
        let mut cells: Vec<Cell> = row.axis_values.iter().map(|&v| Cell::Num(v)).collect();
        cells.extend(cooling_cells(&row.result));
        table.push(cells);
    }
    Ok(table)
}

/// Spectrum (single axis only), response and cooling over the same grid.
pub fn sweep(cfg: &Resolved) -> Result<Outcome> {
    if cfg.sweep.is_empty() {
        bail!("`sweep` needs at least one sweep axis (set sweep.<axis>)");
    }
    at_most(&cfg.sweep, 2, "sweep")?;
    let mut outcome = Outcome::default();
    if cfg.sweep.len() == 1 {
        match spectrum_table(cfg, &cfg.params, &cfg.sweep) {
            Ok(t) => outcome.artifacts.push(Artifact::table("spectrum", t)),
            Err(e) => outcome.failures.push(("spectrum".into(), format!("{e:#}"))),
        }
    }
    let resp = response_outcome(cfg, &cfg.params, &cfg.sweep);
    outcome.artifacts.extend(resp.artifacts);
    match cooling_table(cfg, &cfg.params, &cfg.sweep) {
        Ok(t) => outcome.artifacts.push(Artifact::table("cooling", t)),
        Err(e) => outcome.failures.push(("cooling".into(), format!("{e:#}"))),
    }
    Ok(outcome)
}

/// Minimum of the coalescence measure between the endpoints of the single
/// sweep axis.
pub fn ep_locate(cfg: &Resolved) -> Result<Outcome> {
    let [(axis, grid)] = cfg.sweep.as_slice() else {
        bail!("`ep-locate` needs exactly one sweep axis, got {}", cfg.sweep.len());
    };
    let v = grid.values();
    let (lo, hi) = (v[0].min(v[v.len() - 1]), v[0].max(v[v.len() - 1]));
    let opts = cfg.options.spectrum(cfg.params.gamma());
    let loc = locate_ep(&cfg.params, *axis, (lo, hi), cfg.options.ep_mode, &opts)
        .with_context(|| format!("no exceptional point found along {} in [{lo}, {hi}]", axis.key()))?;
    let mut columns = vec![axis.key().to_string(), "measure".to_string(), "measure_over_gamma".to_string()];
    columns.extend(
        ["plus_re", "plus_im", "minus_re", "minus_im", "zero_re", "zero_im", "ep_order", "pair"].map(String::from),
    );
    let mut table = Table::new(columns);
    let mut row = vec![Cell::Num(loc.value), Cell::Num(loc.measure), Cell::Num(loc.measure / cfg.params.gamma())];
    for label in [BranchLabel::Plus, BranchLabel::Minus, BranchLabel::Zero] {
        let w = loc.spectrum.omega(label);
        row.extend([Cell::Num(w.re), Cell::Num(w.im)]);
    }
    row.push(Cell::Int(loc.classification.order as i64));
    row.push(match loc.classification.coalescing_pair {
        Some((a, b)) => Cell::text(format!("{}-{}", a.name(), b.name())),
        None => Cell::text("none"),
    });
    table.push(row);
    Ok(Outcome::single(Artifact::table("ep_locate", table)))
}

/// Helper for presets: a line plot of several columns against the first.
pub fn plot_columns(table: &Table, title: &str, x_label: &str, y_label: &str, log_x: bool, log_y: bool) -> Plot {
    let x = table.series(&table.columns[0]).unwrap_or_default();
    let series = table.columns[1..]
        .iter()
        .map(|c| Series::new(c.clone(), &x, &table.series(c).unwrap_or_default()))
        .collect();
    Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), log_x, log_y, series }
}
