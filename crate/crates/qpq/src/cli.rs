//! Argument handling and the five experiment commands.

use std::env;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use qpq_core::rng::trial_rng;
use qpq_core::{
    data_privacy_formula, decode_channel, delay_sweep, encode_channel, run_transaction, BobAgent, BobStrategy,
    CatchEstimate, ChannelEncoding, DatabaseConfig, PartitionGameConfig, PartitionModel, Placement, Policy, QpqError,
};
use serde_json::{json, Value};

use crate::artifacts::{self, ConfigRecord, TranscriptRecord};
use crate::config::{self, Settings, OUTPUT_DIR_ENV};
use crate::parallel;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qpq", version, about = "Linear-optics quantum private query simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct CommandArgs {
    /// TOML file with default settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one transaction and print the retrieved bit and the honesty verdict.
    Query(CommandArgs),
    /// Estimate how often Alice catches a cheating Bob.
    UserPrivacy(CommandArgs),
    /// Estimate how often Bob's partition test catches a multi-photon Alice.
    DataPrivacy(CommandArgs),
    /// Tabulate the honesty-test detector probabilities against tap delay.
    DelaySweep(CommandArgs),
    /// Write a line-delimited JSON log of seeded transactions.
    DemoTranscript(CommandArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Query(_) => "query",
            Command::UserPrivacy(_) => "user-privacy",
            Command::DataPrivacy(_) => "data-privacy",
            Command::DelaySweep(_) => "delay-sweep",
            Command::DemoTranscript(_) => "demo-transcript",
        }
    }

    fn args(&self) -> &CommandArgs {
        match self {
            Command::Query(a)
            | Command::UserPrivacy(a)
            | Command::DataPrivacy(a)
            | Command::DelaySweep(a)
            | Command::DemoTranscript(a) => a,
        }
    }

    /// Settings the command reads. Config files may carry others.
    fn accepts(&self) -> &'static [&'static str] {
        match self {
            Command::Query(_) => &["db", "j", "strategy", "policy", "guess", "seed", "encoding"],
            Command::UserPrivacy(_) => {
                &["db", "j", "strategy", "policy", "guess", "trials", "seed", "output", "threads"]
            }
            Command::DataPrivacy(_) => {
                &["x", "t", "n", "target", "placement", "model", "trials", "seed", "output", "threads"]
            }
            Command::DelaySweep(_) => &["db", "j", "sigma", "tau_max", "points", "taus", "output"],
            Command::DemoTranscript(_) => {
                &["db", "j", "strategy", "policy", "guess", "seed", "count", "output", "encoding"]
            }
        }
    }
}

/// Entry point for the binary: runs `argv` against the process stdout and
/// stderr and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let dir = env::var_os(OUTPUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
    run_with(argv, &dir, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Like [`run_cli`] with explicit output directory and streams.
pub fn run_with<I, T>(argv: I, output_dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(argv, output_dir, out) {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            CliError::Usage(e).exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "qpq: {e}");
            e.exit_code()
        }
    }
}

/// Parses `argv` and runs the command, printing a summary to `out`.
pub fn run<I, T>(argv: I, output_dir: &Path, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let command = &cli.command;
    let args = command.args();
    for key in args.settings.present() {
        if !command.accepts().contains(&key) {
            return Err(CliError::Config(format!("{} does not apply to {}", config::flag_name(key), command.name())));
        }
    }
    let file = match &args.config {
        Some(path) => config::load_file(path)?,
        None => Settings::default(),
    };
    let settings = args.settings.clone().over(file);
    let mut printer = Printer(out);
    match command {
        Command::Query(_) => query(&settings, &mut printer),
        Command::UserPrivacy(_) => user_privacy(&settings, output_dir, &mut printer),
        Command::DataPrivacy(_) => data_privacy(&settings, output_dir, &mut printer),
        Command::DelaySweep(_) => sweep(&settings, output_dir, &mut printer),
        Command::DemoTranscript(_) => transcript(&settings, output_dir, &mut printer),
    }
}

struct Printer<'a>(&'a mut dyn Write);

impl Printer<'_> {
    fn line(&mut self, text: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.0, "{}", text.as_ref()).map_err(|e| CliError::io("<stdout>", e))
    }
}

fn parsed<T: FromStr<Err = QpqError>>(value: Option<&str>, default: &str) -> Result<T, CliError> {
    Ok(value.unwrap_or(default).parse()?)
}

fn require_seed(s: &Settings, command: &str) -> Result<u64, CliError> {
    s.seed.ok_or_else(|| CliError::Config(format!("--seed is required for {command}")))
}

fn default_db() -> String {
    format!("random:{}", config::DEFAULT_N)
}

fn policy(s: &Settings, default: &str) -> Result<Policy, CliError> {
    let policy: Policy = parsed(s.policy.as_deref(), default)?;
    Ok(match s.guess {
        Some(g) => policy.with_guess(g == 1),
        None => policy,
    })
}

fn trials(s: &Settings) -> Result<u64, CliError> {
    match s.trials.unwrap_or(config::DEFAULT_TRIALS) {
        0 => Err(CliError::Config("--trials must be at least 1".into())),
        n => Ok(n),
    }
}

fn threads(s: &Settings) -> Result<usize, CliError> {
    match s.threads.unwrap_or(1) {
        0 => Err(CliError::Config("--threads must be at least 1".into())),
        n => Ok(n),
    }
}

fn output_path(s: &Settings, dir: &Path, file: &str) -> PathBuf {
    s.output.clone().unwrap_or_else(|| dir.join(file))
}

fn record(value: Value) -> ConfigRecord {
    match value {
        Value::Object(map) => map,
        _ => unreachable!("config records are built from object literals"),
    }
}

/// Bob's view of the requested index after it crossed the channel.
fn route(encoding: ChannelEncoding, j: u32, n: u32) -> Result<(String, u32), CliError> {
    let label = encode_channel(encoding, j, n)?;
    Ok((label.to_string(), decode_channel(encoding, label, n)?))
}

fn deviation(estimate: &CatchEstimate, reference: f64) -> String {
    let d = (estimate.p_hat - reference).abs();
    if estimate.stderr > 0.0 {
        format!("{:.2} sigma", d / estimate.stderr)
    } else if d == 0.0 {
        "0 (no variance)".into()
    } else {
        format!("{d} with zero stderr")
    }
}

fn estimate_line(e: &CatchEstimate, seed: u64) -> String {
    format!("p_hat: {:.6} +/- {:.6} ({} trials, seed {seed})", e.p_hat, e.stderr, e.trials)
}

fn query(s: &Settings, p: &mut Printer) -> Result<(), CliError> {
    let seed = require_seed(s, "query")?;
    let db = config::resolve_database(s.db.as_deref().unwrap_or(&default_db()), Some(seed))?;
    let strategy: BobStrategy = parsed(s.strategy.as_deref(), "honest")?;
    let encoding: ChannelEncoding = parsed(s.encoding.as_deref(), "spatial")?;
    let (channel, j) = route(encoding, s.j.unwrap_or(1), db.len())?;
    let mut bob = BobAgent::new(strategy)?;
    // A single query defaults to plain-first so the honesty test always counts.
    let outcome = run_transaction(&db, j, &mut bob, policy(s, "plain-first")?, &mut trial_rng(seed, 0))?;

    p.line(format!("database: {db}"))?;
    p.line(format!("channel: {channel}"))?;
    p.line(format!("ordering: {}", outcome.ordering))?;
    if let Some(g) = outcome.guess_used {
        p.line(format!("guess: {}", u8::from(g)))?;
    }
    match outcome.retrieved_bit {
        Some(b) => p.line(format!("retrieved bit: {}", u8::from(b)))?,
        None => p.line("retrieved bit: none (no photon in the expected mode)")?,
    }
    p.line(format!("verdict: {}", outcome.verdict))?;
    let learned: Vec<String> = outcome.bob_info.learned_modes().map(|m| m.to_string()).collect();
    if !learned.is_empty() {
        p.line(format!("bob learned: {}", learned.join(",")))?;
    }
    Ok(())
}

fn user_privacy(s: &Settings, dir: &Path, p: &mut Printer) -> Result<(), CliError> {
    let seed = require_seed(s, "user-privacy")?;
    let db_spec = s.db.clone().unwrap_or_else(default_db);
    let db = config::resolve_database(&db_spec, Some(seed))?;
    let j = s.j.unwrap_or(1);
    let strategy: BobStrategy = parsed(s.strategy.as_deref(), "honest")?;
    let policy = policy(s, "random")?;
    let trials = trials(s)?;
    let threads = threads(s)?;
    let path = output_path(s, dir, artifacts::USER_PRIVACY_FILE);

    let estimate = parallel::user_privacy_estimate(&db, j, strategy, policy, trials, seed, threads)?;
    let scenario = format!("strategy={strategy} policy={policy} db={db} j={j}");
    let config = record(json!({
        "command": "user-privacy",
        "db": db.to_string(),
        "db_source": db_spec,
        "j": j,
        "strategy": strategy.to_string(),
        "policy": policy.to_string(),
        "trials": trials,
        "seed": seed,
        "threads": threads,
    }));
    artifacts::save(&path, &artifacts::estimate_csv(&config, &scenario, &estimate, seed))?;

    p.line(format!("scenario: {scenario}"))?;
    p.line(estimate_line(&estimate, seed))?;
    if let Some(exact) = estimate.exact {
        p.line(format!("oracle: {exact} = {:.6}", exact.to_f64()))?;
        p.line(format!("deviation: {}", deviation(&estimate, exact.to_f64())))?;
    }
    p.line(format!("wrote {}", path.display()))
}

fn data_privacy(s: &Settings, dir: &Path, p: &mut Printer) -> Result<(), CliError> {
    let seed = require_seed(s, "data-privacy")?;
    let x = s.x.unwrap_or(2);
    let t = s.t.unwrap_or(1);
    let n = match s.n {
        Some(n) => n,
        None => {
            x.checked_mul(config::ENTRIES_PER_PART).ok_or_else(|| CliError::Config(format!("--X {x} is too large")))?
        }
    };
    let mut game = PartitionGameConfig::new(n, x, t, trials(s)?, seed);
    if let Some(placement) = &s.placement {
        game.placement = placement.parse::<Placement>()?;
    }
    if let Some(model) = &s.model {
        game.model = model.parse::<PartitionModel>()?;
    }
    game.target = s.target.unwrap_or(1);
    let threads = threads(s)?;
    let path = output_path(s, dir, artifacts::DATA_PRIVACY_FILE);

    let estimate = parallel::data_privacy_estimate(&game, threads)?;
    let formula = data_privacy_formula(x, t)?;
    let scenario =
        format!("partition X={x} t={t} N={n} model={} placement={} target={}", game.model, game.placement, game.target);
    let config = record(json!({
        "command": "data-privacy",
        "x": x,
        "t": t,
        "n": n,
        "target": game.target,
        "placement": game.placement.to_string(),
        "model": game.model.to_string(),
        "trials": game.trials,
        "seed": seed,
        "threads": threads,
    }));
    artifacts::save(&path, &artifacts::estimate_csv(&config, &scenario, &estimate, seed))?;

    p.line(format!("scenario: {scenario}"))?;
    p.line(estimate_line(&estimate, seed))?;
    p.line(format!("formula 1 - (1/X)^(t-1): {formula:.6}"))?;
    p.line(format!("deviation from formula: {}", deviation(&estimate, formula)))?;
    if let (PartitionModel::ExactFiniteN, Some(exact)) = (game.model, estimate.exact) {
        p.line(format!("exact for N={n}: {exact} = {:.6}", exact.to_f64()))?;
    }
    p.line(format!("wrote {}", path.display()))
}

fn sweep_taus(s: &Settings, sigma: f64) -> Result<Vec<f64>, CliError> {
    if let Some(taus) = &s.taus {
        return Ok(taus.clone());
    }
    let tau_max = s.tau_max.unwrap_or(8.0 * sigma);
    let points = s.points.unwrap_or(config::DEFAULT_POINTS);
    if points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    if tau_max <= 0.0 || !tau_max.is_finite() {
        return Err(CliError::Config(format!("--tau-max {tau_max} must be positive")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| tau_max * (i as f64 / last)).collect())
}

fn sweep(s: &Settings, dir: &Path, p: &mut Printer) -> Result<(), CliError> {
    // Nothing is sampled, so the default database is fixed; the detector
    // probabilities do not depend on its contents.
    let db = match &s.db {
        Some(spec) => config::resolve_database(spec, None)?,
        None => DatabaseConfig::new(vec![false; config::DEFAULT_N as usize])?,
    };
    let j = s.j.unwrap_or(1);
    let sigma = s.sigma.unwrap_or(1.0);
    let taus = sweep_taus(s, sigma)?;
    let path = output_path(s, dir, artifacts::DELAY_SWEEP_FILE);

    let rows = delay_sweep(&taus, sigma, &db, j)?;
    let config = record(json!({
        "command": "delay-sweep",
        "db": db.to_string(),
        "j": j,
        "sigma": sigma,
        "taus": taus,
    }));
    artifacts::save(&path, &artifacts::sweep_csv(&config, &rows))?;

    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        p.line(format!("pD0 = {:.6} at tau = {}", first.p_d0, first.tau))?;
        p.line(format!("pD0 = {:.6} at tau = {}", last.p_d0, last.tau))?;
    }
    p.line(format!("wrote {} rows to {}", rows.len(), path.display()))
}

fn transcript(s: &Settings, dir: &Path, p: &mut Printer) -> Result<(), CliError> {
    let seed = require_seed(s, "demo-transcript")?;
    let db_spec = s.db.clone().unwrap_or_else(default_db);
    let db = config::resolve_database(&db_spec, Some(seed))?;
    let strategy: BobStrategy = parsed(s.strategy.as_deref(), "honest")?;
    let encoding: ChannelEncoding = parsed(s.encoding.as_deref(), "spatial")?;
    let policy = policy(s, "random")?;
    let requested = s.j.unwrap_or(1);
    let count = s.count.unwrap_or(config::DEFAULT_COUNT);
    let path = output_path(s, dir, artifacts::TRANSCRIPT_FILE);

    let (channel, j) = route(encoding, requested, db.len())?;
    let mut records = Vec::new();
    for trial in 0..count {
        let mut bob = BobAgent::new(strategy)?;
        let outcome = run_transaction(&db, j, &mut bob, policy, &mut trial_rng(seed, trial))?;
        records.push(TranscriptRecord::new(seed, trial, j, channel.clone(), strategy.to_string(), &outcome));
    }
    let config = record(json!({
        "command": "demo-transcript",
        "db": db.to_string(),
        "db_source": db_spec,
        "j": requested,
        "strategy": strategy.to_string(),
        "policy": policy.to_string(),
        "encoding": encoding.to_string(),
        "seed": seed,
        "count": count,
    }));
    artifacts::save(&path, &artifacts::transcript_jsonl(&config, &records))?;

    let caught = records.iter().filter(|r| r.verdict == "D1Fired").count();
    p.line(format!("{count} transactions, D1 fired in {caught}"))?;
    p.line(format!("wrote {}", path.display()))
}
