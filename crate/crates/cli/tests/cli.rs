//! End-to-end checks of the binary: exit codes, flag validation, output
//! files, and determinism of repeated runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn advrank() -> Command {
    Command::new(env!("CARGO_BIN_EXE_advrank"))
}

fn run(args: &[&str]) -> Output {
    advrank().args(args).output().expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("advrank-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

/// Small spec so e2e runs stay fast.
fn tiny_config(path: &Path) {
    let config = serde_json::json!({
        "dataset": {"kind": "patterns", "classes": 4, "side": 6, "n_per_class": 12, "noise": 0.1, "seed": 7},
        "train_fraction": 0.666,
        "surrogate": {"name": "s-36-12-4", "dims": [36, 12, 4], "init": {"kind": "kaiming-uniform", "seed": 3}},
        "targets": [
            {"name": "t-36-16-4", "dims": [36, 16, 4], "init": {"kind": "kaiming-uniform", "seed": 4}}
        ],
        "train": {"epochs": 40, "learning_rate": 0.1, "batch_size": 16, "weight_decay": 0.001,
                  "holdout_fraction": 0.2, "seed": 5},
        "attack": {"epsilon": 0.0627, "alpha": 0.0157, "steps": 5, "loss": "ce", "targeted": false,
                   "momentum_mu": 0.0, "di_prob": 0.0, "ti_kernel": null, "seed": 6},
        "ks": [1, 2],
        "max_eval_samples": 16,
        "seed": 11,
        "workers": 1
    });
    fs::write(path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("attack"));
    assert!(text.contains("sweep-alpha-t"));
}

#[test]
fn bogus_loss_is_a_usage_error_listing_valid_names() {
    let out = run(&["attack", "--out", "/tmp/unused", "--seed", "1", "--loss", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("rce"), "stderr was: {text}");
    assert!(text.contains("ce-temp"), "stderr was: {text}");
}

#[test]
fn missing_seed_without_config_is_a_usage_error() {
    let out = run(&["attack", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("--seed"), "stderr was: {text}");
}

#[test]
fn unknown_flag_rejected() {
    let out = run(&["attack", "--out", "/tmp/unused", "--seed", "1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn attack_writes_reports_and_is_deterministic() {
    let dir = tmp_dir("attack");
    let config = dir.join("config.json");
    fs::create_dir_all(&dir).unwrap();
    tiny_config(&config);

    let out_a = dir.join("a");
    let status = run(&[
        "attack",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
        "--loss",
        "rce",
        "--eps",
        "16/255",
    ]);
    assert!(
        status.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    for file in [
        "resolved_spec.json",
        "report.csv",
        "report.json",
        "records.jsonl",
        "norms.csv",
    ] {
        assert!(out_a.join(file).exists(), "{file} missing");
    }
    let resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("resolved_spec.json")).unwrap())
            .unwrap();
    assert_eq!(resolved["attack"]["loss"], "rce");
    assert_eq!(resolved["attack"]["epsilon"], 16.0 / 255.0);
    // White-box command drops the targets.
    assert_eq!(resolved["targets"].as_array().unwrap().len(), 0);

    let out_b = dir.join("b");
    let rerun = run(&[
        "attack",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
        "--loss",
        "rce",
        "--eps",
        "16/255",
    ]);
    assert!(rerun.status.success());
    assert_eq!(
        fs::read_to_string(out_a.join("report.json")).unwrap(),
        fs::read_to_string(out_b.join("report.json")).unwrap(),
        "same spec must give identical reports"
    );
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn eval_reports_every_model_row() {
    let dir = tmp_dir("eval");
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    tiny_config(&config);
    let out = dir.join("out");
    let result = run(&[
        "eval",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    // White-box row plus one target.
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn train_saves_loadable_checkpoint() {
    let dir = tmp_dir("train");
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    tiny_config(&config);
    let out = dir.join("out");
    let result = run(&[
        "train",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let model = advrank_core::nn::load_model(&out.join("model.json")).unwrap();
    assert_eq!(model.dims(), vec![36, 12, 4]);
    assert!(out.join("training_log.json").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn sweep_temp_emits_bracketed_rows() {
    let dir = tmp_dir("sweeptemp");
    fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    tiny_config(&config);
    let out = dir.join("out");
    let result = run(&[
        "sweep-temp",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--temps",
        "0.5,1",
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = fs::read_to_string(out.join("temperature_sweep.csv")).unwrap();
    assert!(csv.starts_with("loss,"));
    assert!(csv.contains("\ncw,"));
    assert!(csv.contains("\nrce,"));
    assert!(csv.contains("ce-temp:0.5"));
    let _ = fs::remove_dir_all(&dir);
}
