use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

fn fixnode(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixnode"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(GOLDEN).join(name)).unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string() + "\n"
}

fn sorted_keys(v: &Value) -> String {
    let keys: BTreeSet<&String> = v.as_object().unwrap().keys().collect();
    serde_json::to_string(&keys).unwrap() + "\n"
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_reason(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap()
}

#[test]
fn gap_writes_golden_header_and_known_small_gaps() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(dir.path(), &["gap", "--min-l", "4", "--max-l", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("gap.csv");
    assert_eq!(first_line(&path), golden("gap_header.csv"));
    let text = fs::read_to_string(&path).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    // at L = 4 the gap of the ring is pi^2/8 and the fixed-node gap agrees
    assert_eq!(row[0], 4.0);
    assert!((row[1] - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-10);
    assert!((row[2] - row[1]).abs() < 1e-10);
}

#[test]
fn ctmc_sample_report_has_golden_keys() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(
        dir.path(),
        &[
            "--seed",
            "11",
            "sample",
            "-L",
            "8",
            "--t",
            "300",
            "--tau0",
            "5",
            "--d",
            "1,3",
            "--write-path",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("sample.json"));
    assert_eq!(sorted_keys(&report), golden("sample_ctmc_keys.json"));
    let diags = report["diagnostics"].as_array().unwrap();
    assert_eq!(diags.len(), 2);
    assert_eq!(diags[0]["observable"], "M1");
    assert_eq!(diags[1]["observable"], "M3");
    assert_eq!(sorted_keys(&diags[0]), golden("diagnostics_keys.json"));
    let path = fs::read_to_string(dir.path().join("path_chain0.jsonl")).unwrap();
    assert!(path.lines().count() > 10);
    for line in path.lines() {
        let _: Value = serde_json::from_str(line).unwrap();
    }
}

#[test]
fn mh_series_csv_has_golden_header() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(
        dir.path(),
        &[
            "--seed",
            "2",
            "sample",
            "-L",
            "8",
            "--chain",
            "mh-h",
            "--steps",
            "500",
            "--d",
            "1,3",
            "--write-path",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("series_chain0.csv");
    assert_eq!(first_line(&path), golden("series_header.csv"));
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 501);
    let report = read_json(&dir.path().join("sample.json"));
    assert_eq!(report["chain"], "mh-h");
    let rate = report["acceptance_rates"][0].as_f64().unwrap();
    assert!(rate > 0.0 && rate < 1.0);
}

#[test]
fn outputs_are_byte_identical_for_a_fixed_seed() {
    let runs: Vec<(String, String)> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let args = [
                "--seed", "5", "--jobs", "2", "sample", "-L", "8", "--t", "200", "--tau0", "5", "--chains", "3",
            ];
            assert!(fixnode(dir.path(), &args).status.success());
            let a = fs::read_to_string(dir.path().join("sample.json")).unwrap();
            let args = [
                "--seed",
                "5",
                "sample",
                "-L",
                "8",
                "--chain",
                "mh-f",
                "--steps",
                "800",
                "--write-path",
            ];
            assert!(fixnode(dir.path(), &args).status.success());
            let b = fs::read_to_string(dir.path().join("series_chain0.csv")).unwrap();
            (a, b)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn job_count_does_not_change_results() {
    let dir1 = TempDir::new().unwrap();
    let dir4 = TempDir::new().unwrap();
    let args = |jobs: &'static str| {
        [
            "--seed", "9", "--jobs", jobs, "sample", "-L", "8", "--t", "150", "--tau0", "5", "--chains", "4",
        ]
    };
    assert!(fixnode(dir1.path(), &args("1")).status.success());
    assert!(fixnode(dir4.path(), &args("4")).status.success());
    assert_eq!(
        fs::read(dir1.path().join("sample.json")).unwrap(),
        fs::read(dir4.path().join("sample.json")).unwrap()
    );
}

#[test]
fn corrupt_writes_golden_header_and_one_row_per_pair() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(
        dir.path(),
        &[
            "corrupt", "-L", "6", "--kappa", "0.1,1", "--seeds", "1,2,3", "--steps", "2000",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("corrupt.csv");
    assert_eq!(first_line(&path), golden("corrupt_header.csv"));
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 7);
}

#[test]
fn validate_passes_and_reports_every_check() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(dir.path(), &["validate", "-L", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&dir.path().join("validate.json"));
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 15);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn wick_reports_minus_one_sixth() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(dir.path(), &["wick"]);
    assert!(o.status.success());
    let r = read_json(&dir.path().join("wick.json"))["residual"].as_f64().unwrap();
    assert!((r + 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn wick_of_a_product_state_is_zero() {
    let dir = TempDir::new().unwrap();
    let mut amps = vec!["0"; 16];
    amps[0b0101] = "1";
    let list = amps.join(",");
    let o = fixnode(dir.path(), &["wick", "--amplitudes", &list]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("wick.json"))["residual"].as_f64().unwrap();
    assert!(r.abs() < 1e-12);
}

#[test]
fn verify_start_report_has_golden_keys() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(
        dir.path(),
        &["--seed", "1", "verify-start", "-L", "8", "--repetitions", "50"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("verify_start.json"));
    assert_eq!(sorted_keys(&report), golden("verify_start_keys.json"));
    assert_eq!(report["accepted"], true);
}

#[test]
fn truncated_run_exits_3_with_flip_count() {
    let dir = TempDir::new().unwrap();
    let o = fixnode(
        dir.path(),
        &[
            "--seed",
            "1",
            "sample",
            "-L",
            "8",
            "--t",
            "100",
            "--tau0",
            "1",
            "--epsilon",
            "1e5",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    let reason = stderr_reason(&o);
    assert_eq!(reason["error"], "error_declared");
    assert!(reason["flips"].as_u64().unwrap() > 0);
}

#[test]
fn configuration_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["sample", "-L", "8"],
        &["--seed", "1", "sample", "-L", "7"],
        &["--seed", "1", "sample", "-L", "8", "--d", "8"],
        &["validate", "-L", "12"],
        &["gap", "--max-l", "16"],
        &["corrupt", "-L", "6", "--kappa", "0", "--seeds", "1"],
        &["--jobs", "0", "wick"],
        &["no-such-command"],
    ];
    for args in cases {
        let o = fixnode(dir.path(), args);
        assert_eq!(o.status.code(), Some(4), "{args:?}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"model": "haldane-shastry", "L": 6, "chain": "mh-f", "steps": 400, "seed": 4, "observables": [2]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = fixnode(dir.path(), &["--config", cfg, "sample"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("sample.json"));
    assert_eq!(report["L"], 6);
    assert_eq!(report["chain"], "mh-f");
    assert_eq!(report["diagnostics"][0]["observable"], "M2");

    let o = fixnode(dir.path(), &["--config", cfg, "sample", "--chain", "mh-h", "-L", "8"]);
    assert!(o.status.success());
    let report = read_json(&dir.path().join("sample.json"));
    assert_eq!(report["L"], 8);
    assert_eq!(report["chain"], "mh-h");

    fs::write(
        dir.path().join("bad.json"),
        r#"{"model": "haldane-shastry", "lenght": 6}"#,
    )
    .unwrap();
    let bad = dir.path().join("bad.json");
    let o = fixnode(dir.path(), &["--config", bad.to_str().unwrap(), "wick"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_reason(&o)["error"], "config");
}
