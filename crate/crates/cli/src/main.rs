use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use ep3_optomech_cli::config::ConfigError;
use ep3_optomech_cli::{run, Cli, PartialFailure, UsageError, THREADS_ENV};
use serde_json::json;

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Error class for the machine-readable report and the exit code.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        ("config", 2)
    } else if err.is::<UsageError>() {
        ("usage", 2)
    } else if err.is::<PartialFailure>() {
        ("partial", 1)
    } else if err.chain().any(|e| e.is::<std::io::Error>()) {
        ("io", 1)
    } else {
        ("runtime", 1)
    }
}

fn report(kind: &str, err: &anyhow::Error) {
    let chain: Vec<String> = err.chain().skip(1).map(|e| e.to_string()).collect();
    let body = json!({ "error": { "kind": kind, "message": err.to_string(), "chain": chain } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = anyhow::Error::msg(e.to_string().trim_end().to_string());
            report("usage", &err);
            return ExitCode::from(2);
        }
    };
    if let Err(e) = init_threads() {
        report("config", &e);
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(manifest) => {
            log::info!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = classify(&e);
            report(kind, &e);
            ExitCode::from(code)
        }
    }
}
