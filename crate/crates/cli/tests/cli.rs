use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn nskmp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nskmp"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("NSKMP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Value {
    let o = nskmp(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is one JSON object")
}

/// Exit code and the parsed JSON error line (last line of stderr).
fn err(out: &Path, args: &[&str]) -> (i32, Value) {
    let o = nskmp(out, args);
    let stderr = String::from_utf8_lossy(&o.stderr);
    let last = stderr.lines().last().expect("stderr has an error line");
    (
        o.status.code().unwrap(),
        serde_json::from_str(last).expect("error line is JSON"),
    )
}

fn path(dir: &TempDir, rel: &str) -> String {
    dir.path().join(rel).display().to_string()
}

#[test]
fn gen_data_is_deterministic_and_checkable() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["gen-data", "letter-a", "--seed", "7"]);
    assert_eq!(s["demos"], 10);
    assert_eq!(s["output_dim"], 2);
    let first = fs::read(dir.path().join("letter-a.csv")).unwrap();
    ok(dir.path(), &["gen-data", "letter-a", "--seed", "7"]);
    assert_eq!(fs::read(dir.path().join("letter-a.csv")).unwrap(), first);
    let s = ok(dir.path(), &["gen-data", "letter-a", "--seed", "7", "--check"]);
    assert_eq!(s["files_checked"], 1);

    let (code, e) = err(dir.path(), &["gen-data", "letter-a", "--seed", "8", "--check"]);
    assert_eq!(code, 1);
    assert_eq!(e["error"]["kind"], "check");

    let s = ok(dir.path(), &["gen-data", "handover", "--seed", "1"]);
    assert_eq!(
        (s["demos"].as_u64(), s["input_dim"].as_u64(), s["output_dim"].as_u64()),
        (Some(5), Some(3), Some(3))
    );
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nskmp"))
        .args(["gen-data", "letter-a"])
        .env("NSKMP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("letter-a.csv").exists());
}

#[test]
fn train_and_adapt_round_trip() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen-data", "letter-a"]);
    let data = path(&dir, "letter-a.csv");

    let s = ok(dir.path(), &["train", "--data", &data, "--method", "kmp"]);
    assert_eq!(s["reference_points"], 100);
    assert_eq!(s["lambda"], 0.1);
    let model_bytes = fs::read(dir.path().join("kmp.json")).unwrap();
    ok(dir.path(), &["train", "--data", &data, "--method", "kmp"]);
    assert_eq!(fs::read(dir.path().join("kmp.json")).unwrap(), model_bytes);

    let model = path(&dir, "kmp.json");
    let p = ok(dir.path(), &["adapt", "--model", &model, "--file", "plain.csv"]);
    assert_eq!(p["query"], "predict");
    assert_eq!(p["points"], 200);
    assert!(p["per_point_ms"].as_f64().unwrap() >= 0.0);
    let z = ok(
        dir.path(),
        &["adapt", "--model", &model, "--ns", "0.4:0,0", "--file", "zero.csv"],
    );
    assert_eq!(z["query"], "ns");
    assert_eq!(
        fs::read(dir.path().join("plain.csv")).unwrap(),
        fs::read(dir.path().join("zero.csv")).unwrap()
    );

    ok(
        dir.path(),
        &["adapt", "--model", &model, "--ns", "0.4:300,-200", "--file", "ns.csv"],
    );
    assert_ne!(
        fs::read(dir.path().join("plain.csv")).unwrap(),
        fs::read(dir.path().join("ns.csv")).unwrap()
    );
    let v = ok(dir.path(), &["adapt", "--model", &model, "--via", "0.5:1,1"]);
    assert_eq!(v["query"], "via");

    ok(
        dir.path(),
        &["train", "--data", &data, "--method", "promp", "--basis", "15"],
    );
    let v = ok(
        dir.path(),
        &[
            "adapt",
            "--model",
            &path(&dir, "promp.json"),
            "--via",
            "0.5:1,1",
            "--steps",
            "3",
        ],
    );
    assert_eq!(v["model"], "promp");
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mid: Vec<f64> = csv
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .skip(2)
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((mid[0] - 1.0).abs() < 1e-2 && (mid[1] - 1.0).abs() < 1e-2, "{mid:?}");

    let s = ok(
        dir.path(),
        &["train", "--data", &data, "--method", "gmm", "--components", "4"],
    );
    assert_eq!(s["em"]["components"], 4);
    let (code, _) = err(dir.path(), &["adapt", "--model", &path(&dir, "gmm.json")]);
    assert_eq!(code, 2);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen-data", "letter-a"]);
    let data = path(&dir, "letter-a.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["train", "--data", &data, "--method", "kmp", "--lambda", "-1"],
        vec!["train", "--data", &data, "--method", "kmp", "--length-scale", "0"],
        vec!["train", "--data", "/nonexistent.csv", "--method", "kmp"],
        vec!["train", "--data", &data, "--method", "nope"],
        vec!["adapt", "--model", &data],
        vec!["experiment", "1", "--trials", "0"],
        vec!["experiment", "2", "--basis", "5"],
        vec!["bench", "--sizes", "1"],
    ];
    for args in cases {
        let (code, e) = err(dir.path(), &args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(e["error"]["code"], 2);
        assert!(e["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn malformed_targets_are_rejected() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["gen-data", "letter-a"]);
    ok(
        dir.path(),
        &["train", "--data", &path(&dir, "letter-a.csv"), "--method", "kmp"],
    );
    let model = path(&dir, "kmp.json");
    for bad in [
        vec!["--ns", "0.4"],
        vec!["--ns", "0.4:1,x"],
        vec!["--ns", "0.4:1,2,3"],
        vec!["--ns", "0.1:1,1", "--via", "0.2:1,1"],
        vec!["--via", "0.1:1,1", "--via-covariance", "0"],
    ] {
        let mut args = vec!["adapt", "--model", model.as_str()];
        args.extend(bad.iter());
        assert_eq!(err(dir.path(), &args).0, 2, "{bad:?}");
    }
}

#[test]
fn experiment_smoke_run_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["experiment", "1", "--trials", "1", "--seed", "3"];
    let s = ok(dir.path(), &args);
    assert_eq!(s["experiment"], 1);
    assert!(dir.path().join("experiment1/trials.json").exists());
    assert!(dir.path().join("experiment1/timing.json").exists());
    let trials: Value = serde_json::from_slice(&fs::read(dir.path().join("experiment1/trials.json")).unwrap()).unwrap();
    assert_eq!(trials["schema"], 1);
    assert_eq!(trials["trials"].as_array().unwrap().len(), 5);

    let mut check = args.to_vec();
    check.push("--check");
    let s = ok(dir.path(), &check);
    assert!(s["files_checked"].as_u64().unwrap() >= 6);

    let mut jobs = check.clone();
    jobs.extend(["--jobs", "2"]);
    ok(dir.path(), &jobs);

    let (code, _) = err(
        dir.path(),
        &["experiment", "1", "--trials", "1", "--seed", "4", "--check"],
    );
    assert_eq!(code, 1);
}

#[test]
fn exhausted_budget_exits_with_code_four_and_keeps_results() {
    let dir = TempDir::new().unwrap();
    let o = nskmp(
        dir.path(),
        &["experiment", "1", "--trials", "3", "--budget", "1", "--one-via-only"],
    );
    let stderr = String::from_utf8_lossy(&o.stderr);
    let e: Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(o.status.code(), Some(4), "{stderr}");
    assert_eq!(e["error"]["kind"], "budget");
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["experiment"], 1);
    assert!(dir.path().join("experiment1/trials.json").exists());
}

#[test]
fn bench_writes_a_table() {
    let dir = TempDir::new().unwrap();
    let s = ok(dir.path(), &["bench", "--sizes", "20,40", "--reps", "1"]);
    assert_eq!(s["rows"].as_array().unwrap().len(), 2);
    assert!(s["ns_slope"].is_number());
    let file: Value = serde_json::from_slice(&fs::read(dir.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(file["schema"], 1);
    let (code, _) = err(dir.path(), &["bench", "--sizes", "20", "--check"]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_cleanly() {
    let o = Command::new(env!("CARGO_BIN_EXE_nskmp"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("experiment"));
}
