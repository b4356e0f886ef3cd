//! `ptsusy`: batch front end for spectra, eigenfunctions, identity checks
//! and coherent states of the trigonometric Pöschl-Teller hierarchy.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Output, RunError, Table};
use config::{ConfigError, Format, Settings};

#[derive(Parser)]
#[command(name = "ptsusy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Energies E_n^{(m)} for m ≤ m_max, n ≤ n_max.
    Spectrum {
        /// Add the gap factors M(n, m) and N(n, m).
        #[arg(long)]
        gaps: bool,
    },
    /// Samples of φ_n^{(m)} on a uniform grid over [0, L] plus a norm row.
    Wavefn,
    /// Residuals of the operator identities; exit status 1 if any mandatory check fails.
    Verify {
        /// Reverse the superpotential sign in every ladder operator.
        #[arg(long)]
        negative_control: bool,
    },
    /// Coherent-state normalization, overlaps and resolution of the identity.
    Coherent {
        /// Table written in CSV mode.
        #[arg(long, value_enum, default_value = "overlaps")]
        table: Table,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// Well width L.
    #[arg(long = "length", global = true)]
    length: Option<f64>,
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Hierarchy order.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Excitation index.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Number of grid points.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    grid: Option<u64>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Threshold override IDENTITY=VALUE for `verify` (repeatable).
    #[arg(long = "tol", global = true, value_name = "IDENTITY=VALUE")]
    tol: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Common {
    fn settings(&self) -> Result<Settings, ConfigError> {
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let mut flags = Settings {
            nu: self.nu,
            beta: self.beta,
            hbar: self.hbar,
            length: self.length,
            mass: self.mass,
            m: self.m,
            n: self.n,
            m_max: self.m_max,
            n_max: self.n_max,
            grid_points: self.grid.map(|g| g as usize),
            format: self.format,
            ..Settings::default()
        };
        for (key, value) in [("tol_abs", self.tol_abs), ("tol_rel", self.tol_rel)] {
            if let Some(v) = value {
                flags.set(key, &v.to_string()).map_err(|message| ConfigError::Field {
                    field: key.into(),
                    message,
                })?;
            }
        }
        for spec in &self.tol {
            let (id, value) = spec.split_once('=').ok_or_else(|| ConfigError::Field {
                field: "tol".into(),
                message: format!("expected IDENTITY=VALUE, got `{spec}`"),
            })?;
            let key = format!("tol.{}", id.trim());
            flags
                .set(&key, value.trim())
                .map_err(|message| ConfigError::Field { field: key, message })?;
        }
        Ok(file.overlay(flags))
    }
}

fn run(cli: &Cli) -> Result<Output, RunError> {
    let s = cli.common.settings()?;
    match cli.command {
        Command::Spectrum { gaps } => commands::spectrum(&s, gaps),
        Command::Wavefn => commands::wavefn(&s),
        Command::Verify { negative_control } => commands::verify(&s, negative_control),
        Command::Coherent { table } => commands::coherent(&s, table),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, &out.text),
        None => std::io::stdout().lock().write_all(out.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if out.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
