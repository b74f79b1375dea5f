//! CLI behaviour: exit codes, error JSON, fit/predict round trips, config
//! files, and tree serialization through the command line.

use std::path::Path;
use std::process::Command;

fn mfpls_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfpls"))
}

fn run(args: &[&str], dir: &Path) -> std::process::Output {
    mfpls_bin().args(args).current_dir(dir).output().expect("spawn mfpls")
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "mfpls {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn export_dataset(dir: &Path, setting: &str, extra: &[&str]) {
    let mut args = vec![
        "simulate", "--setting", setting, "--reps", "1", "--seed", "9", "--out", ".",
        "--export-data", "--methods", "mfpls", "--h-max", "4", "--cv-folds", "4", "--n", "80",
    ];
    args.extend_from_slice(extra);
    run_ok(&args, dir);
}

#[test]
fn fit_rejects_zero_components_with_exit_2() {
    let work = tempfile::tempdir().unwrap();
    export_dataset(work.path(), "1", &["--snr", "5"]);
    let out = run(
        &[
            "fit", "--data", "rep0_dim1_train.csv,rep0_dim2_train.csv,rep0_dim3_train.csv",
            "--response", "rep0_response_train.csv", "--basis-size", "20,20,20", "--components",
            "0",
        ],
        work.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let doc: serde_json::Value = serde_json::from_str(stdout.trim()).expect("error JSON on stdout");
    assert_eq!(doc["error"]["code"], "Validation");
}

#[test]
fn missing_file_produces_machine_readable_error() {
    let work = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "fit", "--data", "nope.csv", "--response", "nope_y.csv", "--basis-size", "20",
        ],
        work.path(),
    );
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let doc: serde_json::Value = serde_json::from_str(stdout.trim()).expect("error JSON on stdout");
    assert!(doc["error"]["code"].is_string());
}

#[test]
fn fit_then_predict_reproduces_training_metrics() {
    let work = tempfile::tempdir().unwrap();
    export_dataset(work.path(), "2", &["--scenario", "1"]);
    run_ok(
        &[
            "fit", "--data", "rep0_dim1_train.csv,rep0_dim2_train.csv", "--response",
            "rep0_response_train.csv", "--basis-size", "20,20", "--components", "2", "--seed",
            "4", "--out", "fitdir",
        ],
        work.path(),
    );
    run_ok(
        &[
            "predict", "--model", "fitdir/model.json", "--data",
            "rep0_dim1_train.csv,rep0_dim2_train.csv", "--response", "rep0_response_train.csv",
            "--out", "preddir",
        ],
        work.path(),
    );
    let train: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("fitdir/training_metrics.json")).unwrap())
            .unwrap();
    let pred: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("preddir/metrics.json")).unwrap())
            .unwrap();
    for key in ["auc", "accuracy", "sensitivity", "specificity"] {
        assert_eq!(train[key], pred[key], "metric {key} differs");
    }
}

#[test]
fn regression_fit_predict_round_trip() {
    let work = tempfile::tempdir().unwrap();
    export_dataset(work.path(), "1", &["--snr", "5"]);
    run_ok(
        &[
            "fit", "--data", "rep0_dim1_train.csv,rep0_dim2_train.csv,rep0_dim3_train.csv",
            "--response", "rep0_response_train.csv", "--basis-size", "20,20,20", "--components",
            "cv:4", "--h-max", "6", "--seed", "4", "--out", "fitdir",
        ],
        work.path(),
    );
    run_ok(
        &[
            "predict", "--model", "fitdir/model.json", "--data",
            "rep0_dim1_train.csv,rep0_dim2_train.csv,rep0_dim3_train.csv", "--response",
            "rep0_response_train.csv", "--out", "preddir",
        ],
        work.path(),
    );
    let train: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("fitdir/training_metrics.json")).unwrap())
            .unwrap();
    let pred: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.path().join("preddir/metrics.json")).unwrap())
            .unwrap();
    assert_eq!(train["mspe"], pred["mspe"]);
    // predictions file exists with the right shape
    let preds = std::fs::read_to_string(work.path().join("preddir/predictions.csv")).unwrap();
    assert!(preds.starts_with("id,y_hat"));
    assert_eq!(preds.lines().count(), 41);
}

#[test]
fn tree_command_round_trips_through_predict() {
    let work = tempfile::tempdir().unwrap();
    export_dataset(work.path(), "2", &["--scenario", "1"]);
    run_ok(
        &[
            "tree", "--data", "rep0_dim1_train.csv,rep0_dim2_train.csv", "--response",
            "rep0_response_train.csv", "--basis-size", "20,20", "--components", "1",
            "--max-depth", "3", "--seed", "6", "--out", "treedir",
        ],
        work.path(),
    );
    let rendered = std::fs::read_to_string(work.path().join("treedir/tree.txt")).unwrap();
    assert!(rendered.contains("[depth 0]"));
    // reload the tree through predict and check scores against the library
    run_ok(
        &[
            "predict", "--model", "treedir/tree.json", "--data",
            "rep0_dim1_test.csv,rep0_dim2_test.csv", "--response", "rep0_response_test.csv",
            "--out", "treepred",
        ],
        work.path(),
    );
    let preds = std::fs::read_to_string(work.path().join("treepred/predictions.csv")).unwrap();
    assert!(preds.starts_with("id,score,predicted_class"));
    let metrics = std::fs::read_to_string(work.path().join("treepred/metrics.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&metrics).unwrap();
    assert!(doc["auc"].as_f64().unwrap() > 0.5);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let work = tempfile::tempdir().unwrap();
    std::fs::write(
        work.path().join("run.conf"),
        "setting = 1\nsnr = 5\nreps = 2\nseed = 7\nn = 60\nh-max = 4\ncv-folds = 4\n",
    )
    .unwrap();
    let out1 = run_ok(&["simulate", "--config", "run.conf"], work.path());
    assert!(out1.contains("Setting 1"));
    assert!(out1.contains("2 replications"));
    // flag overrides the file
    let out2 = run_ok(&["simulate", "--config", "run.conf", "--reps", "3"], work.path());
    assert!(out2.contains("3 replications"));
}

#[test]
fn simulate_lists_all_requested_methods() {
    let work = tempfile::tempdir().unwrap();
    let out = run_ok(
        &[
            "simulate", "--setting", "2", "--scenario", "2", "--methods", "mfpls,tmfpls_h1",
            "--reps", "1", "--n", "80", "--seed", "2", "--h-max", "4", "--cv-folds", "4",
        ],
        work.path(),
    );
    assert!(out.contains("mfpls"));
    assert!(out.contains("tmfpls_h1"));
}
