//! End-to-end tests of the `qchaos` binary: flag parsing, both output
//! encodings, file output, config-file runs, reproducibility, and the
//! documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn qchaos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchaos"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

/// CSV lines without the metadata comments.
fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn walk_prints_csv_with_metadata() {
    let out = qchaos(&["walk", "--j", "3"]);
    let text = stdout_of(&out);
    assert!(text.contains("# experiment = walk"));
    assert!(text.contains("# master_seed = 1"));
    assert!(text.contains("# config_sha256 = "));
    let lines = data_lines(&text);
    assert_eq!(lines[0], "step,x_regular,y_regular,x_chaotic,y_chaotic");
    assert_eq!(lines.len(), 1 + 8, "header plus origin plus 7 unit steps");
}

#[test]
fn json_format_emits_one_document() {
    let out = qchaos(&["walk", "--j", "2", "--format", "json"]);
    let text = stdout_of(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["metadata"]["experiment"], "walk");
    assert_eq!(doc["columns"][0], "step");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.csv");
    let out = qchaos(&["walk", "--j", "2", "--out", path.to_str().unwrap()]);
    assert!(stdout_of(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("# experiment = walk"));
    assert_eq!(data_lines(&written).len(), 7);
}

#[test]
fn reruns_are_byte_identical_modulo_timestamp() {
    let args = ["ensemble", "--dim", "4", "--samples", "2", "--delta-n", "5", "--seed", "7"];
    let a = stdout_of(&qchaos(&args));
    let b = stdout_of(&qchaos(&args));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("# created_unix"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));

    let c = stdout_of(&qchaos(&[
        "ensemble", "--dim", "4", "--samples", "2", "--delta-n", "5", "--seed", "8",
    ]));
    assert_ne!(strip(&a), strip(&c));
}

#[test]
fn ensemble_table_has_one_row_per_window() {
    let out = qchaos(&["ensemble", "--beta", "0", "--dim", "8", "--samples", "3", "--delta-n", "6"]);
    let text = stdout_of(&out);
    let lines = data_lines(&text);
    assert_eq!(lines[0], "delta_n,t0_sample_1,t0_sample_2,t0_mean,t0_std,t0_var,bound");
    assert_eq!(lines.len(), 7);
}

#[test]
fn dqc1_reads_a_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.json");
    // 2x2 identity, written in the interchange format by hand.
    std::fs::write(
        &path,
        r#"{"dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}"#,
    )
    .unwrap();
    let out = qchaos(&[
        "dqc1",
        "--matrix",
        path.to_str().unwrap(),
        "--n-max",
        "2",
        "--analytic",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let columns: Vec<&str> =
        doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let ff = columns.iter().position(|&c| c == "form_factor").unwrap();
    for row in rows {
        let value = row[ff].as_f64().unwrap();
        assert!((value - 1.0).abs() < 1e-12, "identity form factor read {value}");
    }
}

#[test]
fn scaling_accepts_schedule_flags() {
    let out = qchaos(&[
        "scaling",
        "--sizes",
        "8",
        "--trials",
        "2",
        "--delta-n",
        "3",
        "--schedule",
        "analytic",
        "--schedule",
        "constant:16",
    ]);
    let text = stdout_of(&out);
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 3, "header plus one row per schedule");
    assert!(lines[1].starts_with("8,analytic,0,"));
    assert!(lines[2].starts_with("8,constant_16,16,"));
}

#[test]
fn config_file_runs_and_flag_overrides_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.json");
    std::fs::write(
        &path,
        r#"{"experiment": "walk", "parameters": {"j": 2.0}, "master_seed": 3, "output_format": "json"}"#,
    )
    .unwrap();
    let out = qchaos(&["--config", path.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["metadata"]["master_seed"], "3");

    let out = qchaos(&["--config", path.to_str().unwrap(), "--seed", "11", "--format", "csv"]);
    let text = stdout_of(&out);
    assert!(text.contains("# master_seed = 11"));
}

#[test]
fn config_file_output_path_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("walk.json");
    let data_path = dir.path().join("out.csv");
    std::fs::write(
        &config_path,
        format!(
            r#"{{"experiment": "walk", "parameters": {{"j": 1.0}}, "output_path": {}}}"#,
            serde_json::to_string(data_path.to_str().unwrap()).unwrap()
        ),
    )
    .unwrap();
    let out = qchaos(&["--config", config_path.to_str().unwrap()]);
    assert!(stdout_of(&out).is_empty());
    assert!(Path::new(&data_path).exists());
}

#[test]
fn usage_and_config_errors_exit_2() {
    let out = qchaos(&["walk", "--j", "not-a-number"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qchaos(&["ensemble", "--beta", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"experiment": "walk", "unknown_key": 1}"#).unwrap();
    let out = qchaos(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = qchaos(&["scaling", "--sizes", "12", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // No subcommand and no config file is a usage error.
    let out = qchaos(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_paths_exit_4() {
    let out = qchaos(&["--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(4));

    let out = qchaos(&["walk", "--j", "1", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn non_unitary_matrix_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dim": 2, "entries": [[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}"#,
    )
    .unwrap();
    let out = qchaos(&["dqc1", "--matrix", path.to_str().unwrap(), "--analytic", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));
}
