//! Batch runner behind the `halving-lab` binary.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition violated, 4
//! internal failure. Report bodies depend only on the configuration; the
//! timestamp lives in the manifest written next to `--out`.

mod config;
mod experiments;

use std::ffi::OsString;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{Common, ExperimentConfig, Params};

/// Version tag of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const EXPERIMENTS: [&str; 5] = ["density", "relate", "construct", "forge", "mc"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<crate::sets::SetError> for CliError {
    fn from(e: crate::sets::SetError) -> Self {
        match e {
            crate::sets::SetError::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

macro_rules! precondition_errors {
    ($($t:ty),*) => {
        $( impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Precondition(e.to_string())
            }
        } )*
    };
}

precondition_errors!(
    crate::density::DensityError,
    crate::relations::RelationError,
    crate::constructions::ConstructionError,
    crate::montecarlo::MonteCarloError
);

impl From<crate::forcing::ForcingError> for CliError {
    fn from(e: crate::forcing::ForcingError) -> Self {
        use crate::forcing::ForcingError::*;
        match e {
            Malformed(_) | BadPartialFn(_) => CliError::Parse(e.to_string()),
            Postcondition(_) => CliError::Internal(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "halving-lab", version, about = "Exact experiments on densities, bisection and independent families")]
pub struct Cli {
    /// TOML file with experiment parameters; flags override it
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Initial and relative densities of schemas
    Density(Flags),
    /// Bisection, splitting and independence verdicts
    Relate(Flags),
    /// Explicit witnesses and splice sweeps
    Construct(Flags),
    /// Replay a schedule of condition extensions
    Forge(Flags),
    /// Seeded trials against analytic bounds
    Mc(Flags),
    /// Run the experiment named in the config file
    Run(Flags),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Flags {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub params: Params,
}

/// A rendered report.
pub struct Report {
    pub body: String,
    pub seeds: Vec<u64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    config_sha256: String,
    seeds: &'a [u64],
    threads: usize,
    created: String,
}

/// Resolves the final configuration from an optional file and the flags.
pub fn resolve(cli: &Cli) -> Result<(String, ExperimentConfig), CliError> {
    let (name, flags) = match &cli.command {
        Command::Density(f) => (Some("density"), f),
        Command::Relate(f) => (Some("relate"), f),
        Command::Construct(f) => (Some("construct"), f),
        Command::Forge(f) => (Some("forge"), f),
        Command::Mc(f) => (Some("mc"), f),
        Command::Run(f) => (None, f),
    };
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.overlay(&flags.common, &flags.params);
    let experiment = match (name, config.experiment.as_deref()) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Parse(format!("config names experiment {b:?}, command is {a:?}")));
        }
        (Some(a), _) => a.to_string(),
        (None, Some(b)) => b.to_string(),
        (None, None) => return Err(CliError::Parse("no experiment named".into())),
    };
    if !EXPERIMENTS.contains(&experiment.as_str()) {
        return Err(CliError::Parse(format!("unknown experiment {experiment:?}")));
    }
    config.experiment = Some(experiment.clone());
    Ok((experiment, config))
}

/// SHA-256 of the canonical JSON form of the configuration, without the
/// output path.
pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(config_value(config).to_string().as_bytes()))
}

/// The configuration as a JSON object with unset fields and the output
/// path dropped.
pub fn config_value(config: &ExperimentConfig) -> serde_json::Value {
    let mut value = serde_json::to_value(config).expect("config serialises");
    if let Some(map) = value.as_object_mut() {
        map.retain(|k, v| !v.is_null() && k != "out");
    }
    value
}

pub fn execute(experiment: &str, config: &ExperimentConfig) -> Result<Report, CliError> {
    match experiment {
        "density" => experiments::density(config),
        "relate" => experiments::relate(config),
        "construct" => experiments::construct(config),
        "forge" => experiments::forge(config),
        "mc" => experiments::mc(config),
        other => Err(CliError::Parse(format!("unknown experiment {other:?}"))),
    }
}

fn write_outputs(experiment: &str, config: &ExperimentConfig, report: &Report) -> Result<(), CliError> {
    let Some(out) = &config.common.out else {
        print!("{}", report.body);
        return Ok(());
    };
    let io = |e: std::io::Error| CliError::Internal(format!("{out}: {e}"));
    std::fs::write(out, &report.body).map_err(io)?;
    let manifest = Manifest {
        tool: "halving-lab",
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        config_sha256: config_hash(config),
        seeds: &report.seeds,
        threads: rayon::current_num_threads(),
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let path = format!("{out}.manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    std::fs::write(Path::new(&path), text).map_err(io)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HALVING_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("HALVING_LAB_THREADS={value:?} is not a count")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the experiment and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = init_threads().and_then(|_| {
        let (experiment, config) = resolve(&cli)?;
        let report = execute(&experiment, &config)?;
        write_outputs(&experiment, &config, &report)
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("halving-lab: {e}");
            e.exit_code()
        }
    }
}
