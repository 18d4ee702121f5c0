use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilcircle")).args(args).output().unwrap()
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilcircle")).args(args).env(key, val).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_of(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let line = text.lines().last().expect("an error record on stderr");
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn help_and_version() {
    assert!(run(&["--help"]).status.success());
    let v = run(&["--version"]);
    assert!(v.status.success());
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn csv_header_layout() {
    let o = run(&["gauss-scan", "--q", "3..6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# nilcircle "));
    assert_eq!(lines[1], "# schema: gauss-scan/1");
    assert!(lines[2].starts_with("# params: {"));
    let rows = body(&text);
    assert_eq!(rows.len(), 1 + 4);
    assert!(!text.contains("# timestamp"));
}

#[test]
fn json_output_parses() {
    let o = run(&["--format", "json", "variation", "--m", "4", "--rhos", "1,2,inf"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "variation/1");
    assert!(doc["rows"].as_array().unwrap().len() >= 3);
    let d: Value = serde_json::from_str(&stdout(&run(&["decompose", "--k", "5", "--mode", "central"]))).unwrap();
    assert!(d["document"].is_object());
}

#[test]
fn exit_codes() {
    let parse = run(&["gauss-scan", "--no-such-flag"]);
    assert_eq!(parse.status.code(), Some(2));
    assert_eq!(error_of(&parse)["kind"], "parse");
    let invalid = run(&["gauss-scan", "--d", "0"]);
    assert_eq!(invalid.status.code(), Some(2));
    assert_eq!(error_of(&invalid)["exit_code"], 2);
    let infeasible = run(&["selfcheck", "--d", "9"]);
    assert_eq!(infeasible.status.code(), Some(3));
    let missing = run(&["--config", "/nonexistent/config.json", "gauss-scan"]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn selfcheck_passes() {
    let o = run(&["selfcheck", "--d", "2", "--trials", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = stdout(&o);
    assert!(text.contains("# schema: selfcheck/1"));
    assert!(text.contains("\"failures\":0") || text.contains("\"failures\": 0"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "gauss-scan", "params": {"q": "5..7", "primes_only": true}}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "gauss-scan", "--q", "2..40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(body(&text).len(), 1 + 2);

    std::fs::write(&cfg, r#"{"params": {"bogus": 1}}"#).unwrap();
    let bad = run(&["--config", cfg.to_str().unwrap(), "gauss-scan"]);
    assert_eq!(bad.status.code(), Some(2));

    std::fs::write(&cfg, r#"{"command": "variation"}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "gauss-scan"]).status.code(), Some(2));
}

#[test]
fn output_file_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&["--output", out.to_str().unwrap(), "--gnuplot", "gauss-scan", "--q", "3..9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(body(&text).len(), 1 + 7);
    let gp = dir.path().join("scan.gp");
    assert!(Path::new(&gp).exists());
    assert!(std::fs::read_to_string(gp).unwrap().contains("scan.csv"));
}

#[test]
fn timestamp_only_changes_the_header() {
    let plain = stdout(&run(&["gauss-scan", "--q", "3..8", "--sample", "4", "--seed", "5"]));
    let stamped = stdout(&run(&["--timestamp", "gauss-scan", "--q", "3..8", "--sample", "4", "--seed", "5"]));
    assert!(stamped.contains("# timestamp: "));
    assert_eq!(body(&plain), body(&stamped));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["nilgauss-scan", "--q", "2..7", "--r", "2"];
    let one = run_env(&args, "NILCIRCLE_THREADS", "1");
    let four = run_env(&args, "NILCIRCLE_THREADS", "4");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = run_env(&args, "NILCIRCLE_THREADS", "zero");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn every_subcommand_runs() {
    for args in [
        vec!["weyl-scan", "--p", "64,128,256"],
        vec!["ergodic-run", "--m", "31", "--log2-n-max", "6"],
        vec!["ergodic-run", "--system", "heisenberg-quotient", "--q", "3", "--log2-n-max", "5", "--rho", "inf"],
        vec!["quasi-geometry", "--r", "1,2,4"],
        vec!["nilgauss-scan", "--q", "2..4", "--method", "brute"],
    ] {
        let o = run(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(body(&stdout(&o)).len() >= 2, "{args:?}");
    }
}
