//! Command-line driver: argument parsing, configuration, and writing of
//! tables, plots and the run manifest.

pub mod commands;
pub mod config;
pub mod export;
pub mod presets;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use commands::Outcome;
use config::{ConfigBuilder, Preset, Resolved};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "EP3_OPTOMECH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ep3-optomech", version, about = "Gain-loss coupled-resonator optomechanics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file (SI units).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one setting; repeatable. `sweep.<axis>=start:stop:points` adds a grid.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "ep3-out")]
    pub out: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv")]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Supermode eigenfrequencies and EP classification.
    Spectrum,
    /// Steady-state amplitudes and coupling.
    SteadyState,
    /// Effective frequency, damping and stability.
    Response,
    /// Phonon number and cooling ratio.
    Cooling,
    /// Spectrum, response and cooling over the same grid.
    Sweep,
    /// Locate an exceptional point between the sweep endpoints.
    EpLocate,
    /// Reproduce a figure preset (fig2, fig3, fig4, fig5).
    Figure {
        /// Preset name; falls back to the `preset` setting.
        preset: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::SteadyState => "steady-state",
            Command::Response => "response",
            Command::Cooling => "cooling",
            Command::Sweep => "sweep",
            Command::EpLocate => "ep-locate",
            Command::Figure { .. } => "figure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Some outputs could not be produced; the rest were written.
#[derive(Debug, Error)]
#[error("{} of {total} outputs failed: {}", .failures.len(), summary(.failures))]
pub struct PartialFailure {
    pub total: usize,
    pub failures: Vec<(String, String)>,
}

fn summary(f: &[(String, String)]) -> String {
    f.iter().map(|(n, e)| format!("{n}: {e}")).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("figure needs a preset name (fig2, fig3, fig4 or fig5)")]
    MissingPreset,
    #[error("unknown preset `{0}`; expected fig2, fig3, fig4 or fig5")]
    UnknownPreset(String),
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    formats: Vec<Format>,
    /// Output files relative to the output directory, sorted.
    files: Vec<String>,
    params: BTreeMap<&'a str, &'a str>,
    failures: BTreeMap<&'a str, &'a str>,
}

pub fn load_config(cli: &Cli) -> Result<Resolved> {
    let mut builder = ConfigBuilder::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        builder.add_toml(&text, &path.display().to_string())?;
    }
    for s in &cli.set {
        builder.add_override(s)?;
    }
    Ok(builder.resolve()?)
}

/// Runs one invocation. On partial failure everything that succeeded is
/// still written, then [`PartialFailure`] is returned.
pub fn run(cli: &Cli) -> Result<PathBuf> {
    let cfg = load_config(cli)?;
    let outcome = match &cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::SteadyState => commands::steady_state(&cfg)?,
        Command::Response => commands::response(&cfg)?,
        Command::Cooling => commands::cooling(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::EpLocate => commands::ep_locate(&cfg)?,
        Command::Figure { preset } => {
            let preset = match preset {
                Some(name) => Preset::from_name(name).ok_or_else(|| UsageError::UnknownPreset(name.clone()))?,
                None => cfg.options.preset.ok_or(UsageError::MissingPreset)?,
            };
            presets::run(preset, &cfg)
        }
    };
    let manifest = write_outputs(&cli.out, cli.command.name(), &cli.format, &cfg, &outcome)?;
    if !outcome.failures.is_empty() {
        return Err(PartialFailure {
            total: outcome.artifacts.len() + outcome.failures.len(),
            failures: outcome.failures,
        }
        .into());
    }
    Ok(manifest)
}

fn write_outputs(dir: &Path, command: &str, formats: &[Format], cfg: &Resolved, outcome: &Outcome) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut files = Vec::new();
    for artifact in &outcome.artifacts {
        for format in &formats {
            let (ext, body) = match format {
                Format::Csv => ("csv", artifact.table.to_csv()),
                Format::Json => ("json", artifact.table.to_json()),
                Format::Svg => match &artifact.plot {
                    Some(p) => ("svg", p.render()),
                    None => continue,
                },
            };
            let name = format!("{}.{ext}", artifact.name);
            let path = dir.join(&name);
            fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))?;
            files.push(name);
        }
    }
    files.sort();
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        formats,
        files,
        params: cfg.echo.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
        failures: outcome.failures.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
