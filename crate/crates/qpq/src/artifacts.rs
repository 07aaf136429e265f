//! CSV and line-delimited JSON result files.
//!
//! Every artifact starts with the resolved experiment config: as `# key: value`
//! comment lines for CSV, and as a `{"config": ...}` first line for JSONL.
//! Files are built in memory and written in one call; all output is UTF-8
//! with LF line endings.

use std::fs;
use std::path::Path;

use qpq_core::{CatchEstimate, SweepRow, TransactionOutcome};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub const USER_PRIVACY_FILE: &str = "user_privacy.csv";
pub const DATA_PRIVACY_FILE: &str = "data_privacy.csv";
pub const DELAY_SWEEP_FILE: &str = "delay_sweep.csv";
pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";

pub const ESTIMATE_COLUMNS: [&str; 6] = ["scenario", "exact", "p_hat", "stderr", "trials", "seed"];
pub const SWEEP_COLUMNS: [&str; 4] = ["tau", "gamma", "pD0", "pD1"];

/// Resolved config as an ordered list of key/value pairs.
pub type ConfigRecord = Map<String, Value>;

fn preamble(config: &ConfigRecord) -> String {
    let mut out = String::new();
    for (key, value) in config {
        let value = match value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out
}

fn csv_body(columns: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    writer.write_record(columns).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

pub fn estimate_csv(config: &ConfigRecord, scenario: &str, estimate: &CatchEstimate, seed: u64) -> Vec<u8> {
    let row = vec![
        scenario.to_owned(),
        estimate.exact.map(|e| e.to_string()).unwrap_or_default(),
        estimate.p_hat.to_string(),
        estimate.stderr.to_string(),
        estimate.trials.to_string(),
        seed.to_string(),
    ];
    let mut bytes = preamble(config).into_bytes();
    bytes.extend(csv_body(&ESTIMATE_COLUMNS, &[row]));
    bytes
}

pub fn sweep_csv(config: &ConfigRecord, rows: &[SweepRow]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.tau.to_string(), r.gamma.to_string(), r.p_d0.to_string(), r.p_d1.to_string()])
        .collect();
    let mut bytes = preamble(config).into_bytes();
    bytes.extend(csv_body(&SWEEP_COLUMNS, &rows));
    bytes
}

/// One transaction of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptRecord {
    pub seed: u64,
    pub trial: u64,
    pub j: u32,
    pub channel: String,
    pub ordering: &'static str,
    pub guess: Option<u8>,
    pub retrieved_bit: Option<u8>,
    pub verdict: &'static str,
    pub strategy: String,
    /// Modes Bob located by measurement, in query order.
    pub bob_learned: Vec<u32>,
}

impl TranscriptRecord {
    pub fn new(seed: u64, trial: u64, j: u32, channel: String, strategy: String, outcome: &TransactionOutcome) -> Self {
        Self {
            seed,
            trial,
            j,
            channel,
            ordering: outcome.ordering.as_str(),
            guess: outcome.guess_used.map(u8::from),
            retrieved_bit: outcome.retrieved_bit.map(u8::from),
            verdict: outcome.verdict.as_str(),
            strategy,
            bob_learned: outcome.bob_info.learned_modes().collect(),
        }
    }
}

pub fn transcript_jsonl(config: &ConfigRecord, records: &[TranscriptRecord]) -> Vec<u8> {
    let mut header = Map::new();
    header.insert("config".into(), Value::Object(config.clone()));
    let mut out = Value::Object(header).to_string();
    out.push('\n');
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("plain data serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

/// Writes `bytes` to `path`.
pub fn save(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
