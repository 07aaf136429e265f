//! Experiment settings shared by command-line flags and TOML config files.
//!
//! Both sources deserialize into the same [`Settings`]; flags are laid over
//! the file, and anything still unset falls back to a per-command default.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qpq_core::rng::trial_rng;
use qpq_core::DatabaseConfig;
use serde::Deserialize;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QPQ_OUTPUT_DIR";

/// Number of database entries when none is given.
pub const DEFAULT_N: u32 = 3;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_POINTS: usize = 50;
pub const DEFAULT_COUNT: u64 = 10;
/// Database size per part in the partition game when `--n` is absent.
pub const ENTRIES_PER_PART: u32 = 16;

/// Trial streams count up from zero; a random database is drawn from the far
/// end so it never shares a stream with a transaction.
const DATABASE_STREAM: u64 = u64::MAX;

macro_rules! settings {
    ($( $(#[$meta:meta])* $name:ident : $ty:ty ),* $(,)?) => {
        #[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct Settings {
            $( $(#[$meta])* pub $name: Option<$ty>, )*
        }

        impl Settings {
            /// Values from `self`, falling back to `base` where unset.
            pub fn over(self, base: Settings) -> Settings {
                Settings { $( $name: self.$name.or(base.$name), )* }
            }

            /// Names of the settings that carry a value.
            pub fn present(&self) -> Vec<&'static str> {
                let mut names = Vec::new();
                $( if self.$name.is_some() { names.push(stringify!($name)); } )*
                names
            }
        }
    };
}

settings! {
    /// Database bits such as `0,1,0`, or `random:N`.
    #[arg(long)]
    db: String,
    /// Index of the wanted entry (1-based).
    #[arg(long)]
    j: u32,
    /// Bob's strategy: honest, mr:first|second|random|both, dephase:G, delay:TAU,SIGMA.
    #[arg(long)]
    strategy: String,
    /// Query ordering: random, plain-first or superposed-first [+guess:0|1].
    #[arg(long)]
    policy: String,
    /// Force Alice's random guess.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    guess: u8,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Artifact path; defaults to a fixed file name in $QPQ_OUTPUT_DIR.
    #[arg(long)]
    output: PathBuf,
    /// Channel encoding: spatial or timeslot:DURATION.
    #[arg(long)]
    encoding: String,
    /// Worker threads for the trial loop.
    #[arg(long)]
    threads: usize,
    /// Number of database parts.
    #[arg(long = "X", visible_alias = "x")]
    #[serde(alias = "X")]
    x: u32,
    /// Photons Alice sends.
    #[arg(long)]
    t: u32,
    /// Database size for the partition game.
    #[arg(long)]
    n: u32,
    /// Alice's intended entry in the partition game.
    #[arg(long)]
    target: u32,
    /// Placement of extra photons: target-only, uniform or same-part.
    #[arg(long)]
    placement: String,
    /// Part model: iid or finite.
    #[arg(long)]
    model: String,
    /// Coherence length of the delay tap.
    #[arg(long)]
    sigma: f64,
    /// Largest delay in the sweep; defaults to 8 sigma.
    #[arg(long)]
    tau_max: f64,
    /// Number of evenly spaced delays from 0 to tau-max.
    #[arg(long)]
    points: usize,
    /// Explicit delays, ascending (overrides tau-max and points).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    taus: Vec<f64>,
    /// Transactions in a transcript.
    #[arg(long)]
    count: u64,
}

/// Command-line spelling of a setting name.
pub fn flag_name(setting: &str) -> String {
    match setting {
        "x" => "--X".to_owned(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

/// Reads a TOML config file. Unknown keys are rejected.
pub fn load_file(path: &Path) -> Result<Settings, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

/// Parses a database descriptor; `random:N` draws `N` uniform bits from the
/// dedicated database stream of `seed`.
pub fn resolve_database(spec: &str, seed: Option<u64>) -> Result<DatabaseConfig, CliError> {
    match spec.trim().strip_prefix("random:") {
        Some(n) => {
            let n: u32 = n.trim().parse().map_err(|_| CliError::Config(format!("database size in {spec:?}")))?;
            let seed = seed.ok_or_else(|| CliError::Config("a random database needs --seed".into()))?;
            Ok(DatabaseConfig::random(n, &mut trial_rng(seed, DATABASE_STREAM))?)
        }
        None => Ok(spec.parse()?),
    }
}
