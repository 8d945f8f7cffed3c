//! `tpqrm`: spectra, gaps, observables, QFI, Wigner functions, quenches and collapse-point
//! bound states of the anisotropic two-photon Rabi model.
//!
//! Exit status: 0 success, 1 configuration error, 2 convergence failure.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{CommandName, Overrides, RunConfig};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Parser)]
#[command(name = "tpqrm", version, about = "Anisotropic two-photon quantum Rabi model")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lowest levels of both parities over an x grid, ED and AA side by side.
    Spectrum(Overrides),
    /// Same- and different-parity gaps over an x grid.
    GapScan(Overrides),
    /// Photon number, <σx> and quadrature widths of the ground state.
    Observables(Overrides),
    /// Quantum Fisher information of the ground state.
    Qfi(Overrides),
    /// Wigner function of the ground state, reduced or qubit-conditioned.
    Wigner(Overrides),
    /// Linear quenches over a range of quench times.
    Quench(Overrides),
    /// Bound-state ladder at the isotropic collapse point.
    Collapse1d(Overrides),
    /// Power-law or quadratic fit of two CSV columns.
    Fit(Overrides),
    /// Bound-level gap at g = g_c as a function of delta.
    GapOpening(Overrides),
    /// Check a configuration and print the resolved manifest without computing.
    Validate {
        /// Command to validate for; defaults to the one named in --config.
        #[arg(long = "for", value_enum)]
        target: Option<CommandName>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Serialize)]
struct Validation {
    ok: bool,
    diagnostics: Vec<String>,
    estimated_cost: String,
    manifest: RunConfig,
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("TPQRM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| ConfigError(format!("TPQRM_THREADS={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

fn validate(target: Option<CommandName>, o: &Overrides) -> Result<(), ConfigError> {
    let target = match (target, &o.config) {
        (Some(t), _) => t,
        (None, Some(path)) => config::load(path)?
            .command
            .ok_or_else(|| ConfigError("config names no command; pass --for".into()))?,
        (None, None) => return Err(ConfigError("pass --for <command> or --config".into())),
    };
    let manifest = RunConfig::assemble(target, o)?;
    let diagnostics = manifest.diagnostics();
    let v = Validation { ok: diagnostics.is_empty(), estimated_cost: manifest.estimated_cost(), diagnostics, manifest };
    println!("{}", serde_json::to_string_pretty(&v).expect("manifest serializes"));
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 1;
    }
    match e.downcast_ref::<tpqrm::Error>() {
        Some(tpqrm::Error::Convergence(_)) | Some(tpqrm::Error::Mapping(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let (name, o) = match &cli.command {
        Cmd::Validate { target, overrides } => {
            return match validate(*target, overrides) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Cmd::Spectrum(o) => (CommandName::Spectrum, o),
        Cmd::GapScan(o) => (CommandName::GapScan, o),
        Cmd::Observables(o) => (CommandName::Observables, o),
        Cmd::Qfi(o) => (CommandName::Qfi, o),
        Cmd::Wigner(o) => (CommandName::Wigner, o),
        Cmd::Quench(o) => (CommandName::Quench, o),
        Cmd::Collapse1d(o) => (CommandName::Collapse1d, o),
        Cmd::Fit(o) => (CommandName::Fit, o),
        Cmd::GapOpening(o) => (CommandName::GapOpening, o),
    };
    let cfg = match RunConfig::assemble(name, o) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let diagnostics = cfg.diagnostics();
    if !diagnostics.is_empty() {
        for d in diagnostics {
            eprintln!("error: {d}");
        }
        return ExitCode::from(1);
    }
    match commands::run(&cfg) {
        Ok(out) if out.unconverged > 0 => {
            eprintln!("error: {} point(s) did not converge; see the `converged` column", out.unconverged);
            ExitCode::from(2)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
