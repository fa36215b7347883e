//! Black-box tests of the `lqlab` binary: exit codes, artifact layout, and
//! the dataset/model lifecycle.

use std::path::Path;
use std::process::{Command, Output};

fn lqlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lqlab"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"seed": 11, "grid_points": 10, "samples_per_env": 150, "total_samples": 300,
           "static_points": 2, "cycles_per_point": 300, "dynamic_levels": 2,
           "predictors": [{"decision-tree": {"max_depth": 4}}]}"#,
    )
    .unwrap();
    path
}

fn run_ok(output: Output) -> Output {
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

#[test]
fn help_prints_subcommands() {
    let out = run_ok(lqlab().arg("--help").output().unwrap());
    let text = String::from_utf8_lossy(&out.stdout).to_lowercase();
    for sub in ["channel", "randomness", "table", "dataset", "model", "filter-demo"] {
        assert!(text.contains(sub), "--help missing {sub}");
    }
}

#[test]
fn missing_config_file_exits_3() {
    let out = lqlab()
        .args(["--config", "/nonexistent/config.json", "channel"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{not json").unwrap();
    let out = lqlab().arg("--config").arg(&cfg).arg("channel").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 1, "bogus_knob": 3}"#).unwrap();
    let out = lqlab().arg("--config").arg(&cfg).arg("channel").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn invalid_config_value_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"train_fraction": 1.5}"#).unwrap();
    let out = lqlab().arg("--config").arg(&cfg).arg("channel").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn channel_writes_artifacts_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("out");
    run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .arg("channel")
            .output()
            .unwrap(),
    );
    for file in [
        "config.json",
        "manifest.json",
        "delivery_rate.csv",
        "rssi_vs_distance.csv",
        "reception_vs_distance.csv",
        "rssi_vs_time.csv",
    ] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("delivery_rate.csv"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("out");
    run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["--seed", "99", "channel"])
            .output()
            .unwrap(),
    );
    let echoed = std::fs::read_to_string(out_dir.join("config.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&echoed).unwrap();
    assert_eq!(value["seed"], 99);
}

#[test]
fn dataset_and_model_lifecycle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("out");
    run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["dataset", "build"])
            .output()
            .unwrap(),
    );
    let data = out_dir.join("dataset.csv");
    let meta = out_dir.join("dataset.meta.json");
    assert!(data.is_file() && meta.is_file());

    let inspect = run_ok(
        lqlab()
            .args(["dataset", "inspect", "--data"])
            .arg(&data)
            .arg("--meta")
            .arg(&meta)
            .output()
            .unwrap(),
    );
    let text = String::from_utf8_lossy(&inspect.stdout);
    assert!(text.contains("samples: 300"), "unexpected inspect output:\n{text}");
    assert!(text.contains("U(S) empirical"));

    run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["model", "train", "--kind", "decision-tree", "--data"])
            .arg(&data)
            .arg("--meta")
            .arg(&meta)
            .output()
            .unwrap(),
    );
    let model = out_dir.join("model.json");
    assert!(model.is_file());

    let eval = run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["model", "eval", "--model"])
            .arg(&model)
            .args(["--data"])
            .arg(&data)
            .arg("--meta")
            .arg(&meta)
            .output()
            .unwrap(),
    );
    let summary = String::from_utf8_lossy(&eval.stdout);
    assert!(summary.contains("kind=decision-tree"), "unexpected eval output:\n{summary}");
    assert!(out_dir.join("eval.csv").is_file());
}

#[test]
fn train_with_unlisted_kind_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("out");
    run_ok(
        lqlab()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .args(["dataset", "build"])
            .output()
            .unwrap(),
    );
    let out = lqlab()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(["model", "train", "--kind", "mlp", "--data"])
        .arg(out_dir.join("dataset.csv"))
        .arg("--meta")
        .arg(out_dir.join("dataset.meta.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
