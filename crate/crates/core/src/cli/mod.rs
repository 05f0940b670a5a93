//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 a run did not
//! converge, 4 numerical failure or a failed validation check.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod validate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{AxisName, AxisSpec, Backend, Format, InitialState, RunConfig, Scope, SweepSpec};
pub use run::{run_steady, run_sweep, Row, RunOutcome};
pub use validate::{run_validate, Check, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<crate::mpo::MpoError> for CliError {
    fn from(e: crate::mpo::MpoError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<crate::oracle::OracleError> for CliError {
    fn from(e: crate::oracle::OracleError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<crate::correlations::CorrelationError> for CliError {
    fn from(e: crate::correlations::CorrelationError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<crate::spinwave::SpinWaveError> for CliError {
    fn from(e: crate::spinwave::SpinWaveError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Outcome of one grid point, ordered from best to worst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 3,
            Status::Failed => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotConverged => "not_converged",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xyness", version, about = "Steady states of the driven-dissipative XY chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run or sweep file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads for sweep points.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Built-in parameter set; see `xyness presets`.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single steady-state run.
    Steady(Common),
    /// Grid of steady-state runs over one or two parameters.
    Sweep(Common),
    /// Mean-field phase labels over the grid of a sweep file.
    Meanfield(Common),
    /// Spin-wave correlator table, or correlation lengths over a grid.
    Spinwave(Common),
    /// Run a validation suite.
    Validate {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// List built-in presets.
    Presets,
}

/// Load the sweep spec named by `--config` or `--preset` and apply flag
/// overrides.
pub fn load_spec(common: &Common) -> Result<SweepSpec, CliError> {
    let mut spec = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => return Err(CliError::Config("--config and --preset are exclusive".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            SweepSpec::from_toml(&text)?
        }
        (None, Some(name)) => presets::preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; available: {}",
                presets::names().join(", ")
            ))
        })?,
        (None, None) => return Err(CliError::Config("one of --config or --preset is required".into())),
    };
    if let Some(out) = &common.out {
        spec.base.output = Some(out.display().to_string());
    }
    if let Some(f) = &common.format {
        spec.base.format = f.parse()?;
    }
    spec.base.validate()?;
    Ok(spec)
}

fn workers(common: &Common) -> Result<usize, CliError> {
    match common.workers {
        Some(0) => Err(CliError::Config("--workers must be positive".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn output_path(cfg: &RunConfig) -> Option<&Path> {
    cfg.output.as_deref().map(Path::new)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Steady(common) => {
            let spec = load_spec(&common)?;
            let cfg = spec.base;
            let out = run_steady(&cfg)?;
            output::write_rows(&out.rows, output_path(&cfg), cfg.format, false, &cfg.to_toml())?;
            Ok(out.status.exit_code())
        }
        Command::Sweep(common) => {
            let spec = load_spec(&common)?;
            spec.validate()?;
            let rows = run_sweep(&spec, workers(&common)?)?;
            let worst = rows.iter().map(|r| r.status).max().unwrap_or(Status::Ok);
            output::write_rows(&rows, output_path(&spec.base), spec.base.format, true, &spec.to_toml())?;
            Ok(worst.exit_code())
        }
        Command::Meanfield(common) => {
            let spec = load_spec(&common)?;
            let rows = run::meanfield_rows(&spec)?;
            output::write_serialized(&rows, output_path(&spec.base), spec.base.format, &spec.to_toml())?;
            Ok(0)
        }
        Command::Spinwave(common) => {
            let spec = load_spec(&common)?;
            let path = output_path(&spec.base);
            if spec.axes.is_empty() {
                let rows = run::spinwave_table(&spec.base)?;
                output::write_serialized(&rows, path, spec.base.format, &spec.to_toml())?;
            } else {
                let rows = run::spinwave_lengths(&spec)?;
                output::write_serialized(&rows, path, spec.base.format, &spec.to_toml())?;
            }
            Ok(0)
        }
        Command::Validate { suite, common } => {
            let checks = run_validate(suite)?;
            let all_pass = checks.iter().all(|c| c.pass);
            let text = validate::report(&checks);
            match &common.out {
                Some(p) => std::fs::write(p, &text).map_err(|e| CliError::Io(e.to_string()))?,
                None => print!("{text}"),
            }
            Ok(if all_pass { 0 } else { 4 })
        }
        Command::Presets => {
            for (name, about) in presets::PRESETS {
                println!("{name:<10} {about}");
            }
            Ok(0)
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
