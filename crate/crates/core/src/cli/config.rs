//! Experiment parameters, shared by flags and TOML config files. Every
//! field is optional; flags override the file and defaults fill the rest.

use clap::Args;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::rational::{parse_rational, Rational};
use crate::sets::SetSchema;

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Set schema; repeat for families [density, relate, construct]
    #[arg(long = "set")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<String>,
    /// Subject set `S` [relate]
    #[arg(long)]
    pub s: Option<String>,
    /// Base set `X` [density, relate, construct, mc]
    #[arg(long)]
    pub x: Option<String>,
    /// Set to test against a chopped real [construct factorial]
    #[arg(long)]
    pub y: Option<String>,
    /// Relation name [relate]
    #[arg(long)]
    pub relation: Option<String>,
    /// Witness or experiment kind [construct, mc]
    #[arg(long)]
    pub kind: Option<String>,
    /// Burn-in `n0` for limit relations [relate]
    #[arg(long)]
    pub n0: Option<u64>,
    /// First length of the density window [density]
    #[arg(long)]
    pub from: Option<u64>,
    /// `rho` as p/q [relate]
    #[arg(long)]
    pub rho: Option<String>,
    /// Largest subfamily size [relate]
    #[arg(long)]
    pub cap: Option<usize>,
    /// Interval count [construct non-meagre]
    #[arg(long)]
    pub depth: Option<u64>,
    /// Comma-separated table `g(0),g(1),...` [construct dominator]
    #[arg(long)]
    pub table: Option<String>,
    /// Block count [construct cohen]
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Largest extra length per block [construct cohen]
    #[arg(long)]
    pub max_delta: Option<u64>,
    /// Trial or instance count [construct *-splice, mc]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Walk length [mc recurrence]
    #[arg(long)]
    pub steps: Option<u64>,
    /// Coin count [mc single-m]
    #[arg(long)]
    pub k: Option<u64>,
    /// Block index [mc fail-rate, single-m]
    #[arg(long)]
    pub n: Option<u64>,
    /// Target size inside the block [mc fail-rate]
    #[arg(long)]
    pub target_len: Option<u64>,
    /// Largest block index audited [mc delta-audit]
    #[arg(long)]
    pub max_n: Option<u64>,
    /// JSON file holding a list of steps [forge]
    #[arg(long)]
    pub schedule: Option<String>,
    /// Use the standard schedule on this many ids [forge]
    #[arg(long)]
    pub indices: Option<usize>,
    /// Round budget [forge]
    #[arg(long)]
    pub rounds: Option<usize>,
}

/// Flags common to every experiment.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Tolerance as p/q
    #[arg(long)]
    pub tol: Option<String>,
    /// Report path; a manifest is written next to it
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
}

const KEYS: &[&str] = &[
    "experiment", "seed", "horizon", "tol", "out", "format", "sets", "s", "x", "y", "relation", "kind", "n0",
    "from", "rho", "cap", "depth", "table", "blocks", "max_delta", "trials", "steps", "k", "n", "target_len",
    "max_n", "schedule", "indices", "rounds",
];

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    #[serde(flatten)]
    pub common: Common,
    #[serde(flatten)]
    pub params: Params,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
        if let Some(key) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Parse(format!("config: unknown key {key:?}")));
        }
        table.try_into().map_err(|e| CliError::Parse(format!("config: {e}")))
    }

    /// Flags win over values already present.
    pub fn overlay(&mut self, common: &Common, params: &Params) {
        overlay!(self.common, common, seed, horizon, tol, out, format);
        let p = &mut self.params;
        if !params.sets.is_empty() {
            p.sets = params.sets.clone();
        }
        overlay!(
            p, params, s, x, y, relation, kind, n0, from, rho, cap, depth, table, blocks, max_delta, trials,
            steps, k, n, target_len, max_n, schedule, indices, rounds
        );
    }

    pub fn seed(&self) -> u64 {
        self.common.seed.unwrap_or(0)
    }

    pub fn horizon(&self) -> u64 {
        self.common.horizon.unwrap_or(10_000)
    }

    pub fn tol(&self) -> Result<Rational, CliError> {
        rational(self.common.tol.as_deref().unwrap_or("1/10"), "tol")
    }

    pub fn csv(&self) -> bool {
        self.common.format.as_deref() == Some("csv")
    }
}

pub fn rational(text: &str, what: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn schema(text: &str) -> Result<SetSchema, CliError> {
    text.parse().map_err(|e| CliError::Parse(format!("{text:?}: {e}")))
}

pub fn required<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Parse(format!("missing --{name}")))
}
