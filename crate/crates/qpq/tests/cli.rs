use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};

use qpq::run_with;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qpq(dir: &Path, args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qpq").chain(args.iter().copied());
    let code = run_with(argv, dir, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn field(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim_start_matches(':').trim().to_owned()))
        .unwrap_or_else(|| panic!("no {key:?} in {stdout}"))
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn honest_query_retrieves_the_bit() {
    let dir = tempfile::tempdir().unwrap();
    let r = qpq(dir.path(), &["query", "--db", "0,1,0", "--j", "2", "--strategy", "honest", "--seed", "7"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(field(&r.stdout, "retrieved bit"), "1");
    assert_eq!(field(&r.stdout, "verdict"), "D0Fired");
    assert_eq!(field(&r.stdout, "channel"), "mode 2");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none(), "query writes no files");
}

#[test]
fn time_slot_channel_label() {
    let dir = tempfile::tempdir().unwrap();
    let r = qpq(dir.path(), &["query", "--db", "0,1,0", "--j", "3", "--encoding", "timeslot:2.5", "--seed", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(field(&r.stdout, "channel"), "time offset 7.5");
    assert_eq!(field(&r.stdout, "retrieved bit"), "0");
}

#[test]
fn measure_and_reprepare_estimate_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        ["user-privacy", "--strategy", "mr:random", "--policy", "plain-first", "--trials", "100000", "--seed", "1"];
    let r = qpq(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("oracle: 1/4"), "{}", r.stdout);

    let rows = data_rows(&dir.path().join("user_privacy.csv"));
    assert_eq!(rows.len(), 1);
    let p_hat: f64 = rows[0][2].parse().unwrap();
    let stderr: f64 = rows[0][3].parse().unwrap();
    assert_eq!(rows[0][1], "1/4");
    assert!((p_hat - 0.25).abs() < 3.0 * stderr, "{p_hat} ± {stderr}");
    assert_eq!(rows[0][4], "100000");
    assert_eq!(rows[0][5], "1");
}

#[test]
fn single_photon_alice_is_never_caught() {
    let dir = tempfile::tempdir().unwrap();
    let r = qpq(dir.path(), &["data-privacy", "--X", "2", "--t", "1", "--trials", "1000", "--seed", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = data_rows(&dir.path().join("data_privacy.csv"));
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[0][1], "0");
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let r = qpq(dir.path(), &["delay-sweep", "--sigma", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "tau,gamma,pD0,pD1"));
    assert!(text.starts_with("# command: delay-sweep\n"));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0], ["0", "1", "1", "0"]);
    assert_eq!(rows[49][0], "16");

    let r = qpq(dir.path(), &["delay-sweep", "--taus", "0,1,3", "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(data_rows(&out).len(), 3);
}

#[test]
fn transcript_lines_are_json() {
    let dir = tempfile::tempdir().unwrap();
    let r =
        qpq(dir.path(), &["demo-transcript", "--strategy", "mr:both", "--count", "5", "--seed", "9", "--db", "1,0"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(dir.path().join("transcript.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0]["config"]["strategy"], "mr:both");
    assert_eq!(lines[0]["config"]["count"], 5);
    for (i, rec) in lines[1..].iter().enumerate() {
        assert_eq!(rec["trial"], i as u64);
        assert_eq!(rec["seed"], 9);
        assert_eq!(rec["j"], 1);
        for key in ["ordering", "guess", "retrieved_bit", "verdict", "strategy"] {
            assert!(rec.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "strategy = \"mr:first\"\ntrials = 5000\nseed = 4\nsigma = 3.0\n").unwrap();
    let r = qpq(dir.path(), &["user-privacy", "--config", cfg.to_str().unwrap(), "--trials", "2000"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(dir.path().join("user_privacy.csv")).unwrap();
    assert!(text.contains("# strategy: mr:first\n"));
    assert!(text.contains("# trials: 2000\n"));
    assert!(text.contains("# seed: 4\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config_errors: &[&[&str]] = &[
        &["query", "--db", "0,1"],
        &["query", "--seed", "1", "--strategy", "peek"],
        &["query", "--seed", "1", "--db", "0,2"],
        &["query", "--seed", "1", "--trials", "5"],
        &["user-privacy", "--seed", "1", "--trials", "0"],
        &["delay-sweep", "--points", "1"],
        &["frobnicate"],
        &["query", "--guess", "2"],
    ];
    for args in config_errors {
        let r = qpq(d, args);
        assert_eq!(r.code, 1, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }

    let bad_key = d.join("bad.toml");
    fs::write(&bad_key, "seeds = 3\n").unwrap();
    assert_eq!(qpq(d, &["query", "--config", bad_key.to_str().unwrap()]).code, 1);

    let domain_errors: &[&[&str]] = &[
        &["query", "--db", "0,1", "--j", "3", "--seed", "1"],
        &["user-privacy", "--strategy", "dephase:1.5", "--seed", "1", "--trials", "10"],
        &["data-privacy", "--X", "3", "--n", "8", "--seed", "1"],
        &["data-privacy", "--X", "2", "--t", "2", "--placement", "target-only", "--seed", "1"],
        &["delay-sweep", "--taus", "1,0"],
    ];
    for args in domain_errors {
        let r = qpq(d, args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert_eq!(r.stderr.lines().count(), 1);
    }

    let missing = d.join("no/such/dir/out.csv");
    assert_eq!(qpq(d, &["delay-sweep", "--output", missing.to_str().unwrap()]).code, 3);
    assert_eq!(qpq(d, &["query", "--config", d.join("absent.toml").to_str().unwrap()]).code, 3);

    let help = qpq(d, &["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("user-privacy"));
}

#[test]
fn artifacts_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["user-privacy", "--strategy", "mr:random", "--trials", "20000", "--seed", "11"],
        &["data-privacy", "--X", "4", "--t", "3", "--trials", "20000", "--seed", "11"],
        &["delay-sweep"],
        &["demo-transcript", "--strategy", "dephase:0.3", "--count", "20", "--seed", "11"],
    ];
    for args in runs {
        assert_eq!(qpq(a.path(), args).code, 0);
        assert_eq!(qpq(b.path(), args).code, 0);
    }
    for file in ["user_privacy.csv", "data_privacy.csv", "delay_sweep.csv", "transcript.jsonl"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }

    let c = tempfile::tempdir().unwrap();
    let mut threaded = runs[0].to_vec();
    threaded.extend(["--threads", "4"]);
    assert_eq!(qpq(c.path(), &threaded).code, 0);
    assert_eq!(data_rows(&a.path().join("user_privacy.csv")), data_rows(&c.path().join("user_privacy.csv")));
}

#[test]
fn binary_honours_output_dir_variable() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_qpq"))
        .args(["delay-sweep", "--points", "5"])
        .env("QPQ_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(data_rows(&dir.path().join("delay_sweep.csv")).len(), 5);

    let status = Command::new(env!("CARGO_BIN_EXE_qpq")).arg("query").stderr(Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
