//! CLI surface tests: exit codes, error paths, and output layout.

use std::path::Path;
use std::process::Command;

fn elg<S: AsRef<std::ffi::OsStr>>(args: impl IntoIterator<Item = S>) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_elg"))
        .args(args)
        .output()
        .expect("spawn elg");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn write_model(dir: &Path) -> String {
    let path = dir.join("model.json");
    std::fs::write(
        &path,
        r#"{"assets":["cash","risky"],"atoms":[[0.0,0.2],[0.0,-0.1]],"probs":[0.5,0.5],"riskless":0}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn optimize_dominant_model_lands_on_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let out = dir.path().join("run");
    let (code, _, _) = elg([
        "optimize",
        "--model",
        &model,
        "--n",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    let weights = result["weights"].as_array().unwrap();
    assert!((weights[0].as_f64().unwrap() - 0.0).abs() <= 1e-6);
    assert!((weights[1].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!(out.join("manifest.json").exists());
    assert!(out.join("result.csv").exists());
}

#[test]
fn optimize_value_is_horizon_independent_under_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let mut values = Vec::new();
    for n in ["1", "3"] {
        let out = dir.path().join(format!("run{n}"));
        let (code, _, _) = elg([
            "optimize",
            "--model",
            &model,
            "--n",
            n,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let result: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap())
                .unwrap();
        values.push(result["value"].as_f64().unwrap());
    }
    assert!((values[0] - values[1]).abs() <= 1e-9);
}

#[test]
fn malformed_model_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = dir.path().join("run");
    let (code, _, stderr) = elg([
        "optimize",
        "--model",
        path.to_str().unwrap(),
        "--n",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "stderr: {stderr}");
    assert!(stderr.contains("error"));
}

#[test]
fn invariant_violating_model_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"assets":["a","b"],"atoms":[[0.0,0.2]],"probs":[0.9]}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let (code, _, stderr) = elg([
        "optimize",
        "--model",
        path.to_str().unwrap(),
        "--n",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("probability sum"));
}

#[test]
fn unconverged_optimize_exits_two_but_writes_best() {
    let dir = tempfile::tempdir().unwrap();
    // Interior optimum cannot be certified in a single iteration.
    let path = dir.path().join("interior.json");
    std::fs::write(
        &path,
        r#"{"assets":["cash","risky"],"atoms":[[0.0,1.0],[0.0,-0.5]],"probs":[0.6,0.4],"riskless":0}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = elg([
        "optimize",
        "--model",
        path.to_str().unwrap(),
        "--n",
        "1",
        "--max-iters",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["converged"], false);
}

#[test]
fn bounds_full_weight_rows_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = elg([
        "bounds",
        "--kj",
        "1.0",
        "--n",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("result.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cells[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn bounds_known_row_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, stdout, _) = elg([
        "bounds",
        "--kj",
        "0.5",
        "--n",
        "10",
        "--epsilon",
        "0.07",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("n_star = 10"));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    let rows = result["rows"].as_array().unwrap();
    let row10 = &rows[9];
    assert!((row10["lower"].as_f64().unwrap() + 0.030685).abs() <= 1e-6);
    assert!((row10["upper"].as_f64().unwrap() - 0.069315).abs() <= 1e-6);
    assert_eq!(result["plan"]["n_star"], 10);
}

#[test]
fn bounds_rejects_bad_epsilon_with_usage_hint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, stderr) = elg([
        "bounds",
        "--kj",
        "0.5",
        "--n",
        "5",
        "--epsilon",
        "5.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("epsilon"));
}

#[test]
fn scan_zero_trials_is_an_empty_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = elg([
        "scan",
        "--trials",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("result.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "header only");
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["violation_candidates"], 0);
}

#[test]
fn scan_requires_exactly_one_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = elg(["scan", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, _) = elg(["bounds", "--bogus", "1"]);
    assert_eq!(code, 1);
}

#[test]
fn backtest_constant_prices_give_unit_ratios_and_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let ticks = dir.path().join("ticks.csv");
    let mut text = String::from("timestamp,price\n");
    for i in 0..200 {
        text.push_str(&format!("{i},50.0\n"));
    }
    std::fs::write(&ticks, text).unwrap();
    let out = dir.path().join("run");
    let (code, _, stderr) = elg([
        "backtest",
        "--ticks",
        ticks.to_str().unwrap(),
        "--k2",
        "0.5",
        "--n-grid",
        "1,2",
        "--window",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let dom = std::fs::read_to_string(out.join("dominance.csv")).unwrap();
    for line in dom.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1].parse::<f64>().unwrap(), 1.0);
        assert_eq!(cells[2].parse::<f64>().unwrap(), 1.0);
    }
    let gaps = std::fs::read_to_string(out.join("gap_curve.csv")).unwrap();
    for line in gaps.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[4].parse::<f64>().unwrap(), 0.0, "gap row {line}");
    }
}

#[test]
fn backtest_upward_drift_makes_asset_dominant_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let ticks = dir.path().join("ticks.csv");
    let mut text = String::from("timestamp,price\n");
    let mut price = 100.0f64;
    for i in 0..300 {
        text.push_str(&format!("{i},{price:.9}\n"));
        price *= 1.001;
    }
    std::fs::write(&ticks, text).unwrap();
    let out = dir.path().join("run");
    let (code, _, stderr) = elg([
        "backtest",
        "--ticks",
        ticks.to_str().unwrap(),
        "--k2",
        "0.5",
        "--n-grid",
        "1",
        "--window",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    let fractions = &result["dominance"]["fractions"];
    assert_eq!(fractions["asset"].as_f64().unwrap(), 1.0);
    assert_eq!(fractions["cash"].as_f64().unwrap(), 0.0);
}

#[test]
fn backtest_rejects_out_of_range_k2() {
    let dir = tempfile::tempdir().unwrap();
    let ticks = dir.path().join("ticks.csv");
    std::fs::write(&ticks, "0,1.0\n1,1.0\n").unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = elg([
        "backtest",
        "--ticks",
        ticks.to_str().unwrap(),
        "--k2",
        "1.5",
        "--n-grid",
        "1",
        "--window",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}
