//! End-to-end checks of the CLI binary: exit codes, CSV determinism across
//! thread counts, and the learn/predict round trip.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paulilearn"))
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn qst_csv_is_byte_identical_across_thread_counts() {
    let dir = std::env::temp_dir().join("paulilearn_cli_qst");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("qst.json");
    write(
        &config,
        r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 2},
            "noise": {"type": "depolarizing", "gamma": 0.05},
            "learner": {"l_prime": [1, 2], "n_data": 300},
            "trials": 2,
            "seed": 21
        }"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.join(format!("rows_{threads}.csv"));
        let status = bin()
            .args(["qst", "--config"])
            .arg(&config)
            .args(["--threads", threads, "--no-timing", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "CSV bytes differ across thread counts");
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with(
        "experiment,n,rows,cols,depth,l_prime,gamma,noise_type,trial,seed,metric,value,wall_ms"
    ));
    assert_eq!(text.lines().count(), 1 + 4); // header + trials x l'
}

#[test]
fn invalid_config_exits_with_code_2() {
    let dir = std::env::temp_dir().join("paulilearn_cli_bad");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("bad.json");
    write(&config, r#"{"experiment": "qst_sweep", "trials": 0}"#);
    let status = bin()
        .args(["qst", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // subcommand / experiment mismatch is a config error too
    write(
        &config,
        r#"{
            "experiment": "qst_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 1}
        }"#,
    );
    let status = bin()
        .args(["qpt", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn lower_bound_prints_value() {
    let dir = std::env::temp_dir().join("paulilearn_cli_lb");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("lb.json");
    write(
        &config,
        r#"{
            "experiment": "lower_bound",
            "lower_bound": {"gamma": 0.1, "d": 10, "n": 4, "eta": 0.5}
        }"#,
    );
    let output = bin()
        .args(["lower-bound", "--config"])
        .arg(&config)
        .args(["--no-timing"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(11)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 0.14288).abs() < 5e-4, "lower bound {value}");
}

#[test]
fn learn_then_predict_round_trip() {
    let dir = std::env::temp_dir().join("paulilearn_cli_learn");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("learn.json");
    write(
        &config,
        r#"{
            "experiment": "qpt_sweep",
            "circuit": {"architecture": "tfim", "rows": 2, "cols": 2, "layers": 2},
            "noise": {"type": "depolarizing", "gamma": 0.02},
            "learner": {"l_prime": [2], "n_data": 1, "complete_ensemble": true},
            "seed": 5
        }"#,
    );
    let model = dir.join("model.json");
    let status = bin()
        .args(["learn", "--config"])
        .arg(&config)
        .args(["--model", "process", "--out"])
        .arg(&model)
        .status()
        .unwrap();
    assert!(status.success());

    let inputs = dir.join("inputs.json");
    write(
        &inputs,
        r#"["Z+Z+Z+Z+", "X-Y+Z-X+", [[0,0,1],[0,0,1],[0,0,1],[0,0,1]]]"#,
    );
    let output = bin()
        .args(["predict", "--model"])
        .arg(&model)
        .arg("--inputs")
        .arg(&inputs)
        .output()
        .unwrap();
    assert!(output.status.success());
    let parsed: serde_json::Value =
        serde_json::from_slice(&output.stdout).unwrap();
    let values = parsed["values"].as_array().unwrap();
    assert_eq!(values.len(), 3);
    // the all-|0> string and its Bloch form are the same input
    let a = values[0].as_f64().unwrap();
    let c = values[2].as_f64().unwrap();
    assert!((a - c).abs() < 1e-12);
    // exact ensemble training on a complete basis: prediction bounded by the
    // observable's norm
    assert!(a.abs() <= 1.0 + 1e-9);
}

#[test]
fn checks_pass_with_exit_zero() {
    let dir = std::env::temp_dir().join("paulilearn_cli_checks");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("checks.json");
    write(
        &config,
        r#"{
            "experiment": "moment_checks",
            "eval": {"moment_draws": 8000},
            "seed": 3
        }"#,
    );
    let out = dir.join("checks.csv");
    let status = bin()
        .args(["checks", "--config"])
        .arg(&config)
        .args(["--no-timing", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.with_extension("report.json").exists());
}
