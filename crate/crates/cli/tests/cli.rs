// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BELL_PHI_MINUS: &str = r#"{"n": 2, "gates": [
  {"name": "H", "targets": [0]},
  {"name": "X", "targets": [1]},
  {"name": "Z", "targets": [0]},
  {"name": "CNOT", "targets": [0, 1]}
]}"#;

fn nmrqc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmrqc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

#[test]
fn grover_reports_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let out = nmrqc(dir.path(), &["algorithm", "grover4", "--target", "3", "--out", "o"]);
    assert!(out.status.success());
    let r = json(&dir.path().join("o/report.json"));
    assert_eq!(r["algorithm"], "grover4");
    assert!((r["probabilities"]["10"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let state = json(&dir.path().join("o/state.json"));
    assert_eq!(state["n"], 2);
    assert!((state["re"][2][2].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn simulate_pulse_path_reports_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bell.json"), BELL_PHI_MINUS).unwrap();
    let out = nmrqc(
        dir.path(),
        &["simulate", "--machine", "gemini", "--circuit", "bell.json", "--path", "pulse", "--out", "o"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&dir.path().join("o/report.json"));
    assert_eq!(r["path"], "pulse");
    assert!(r["fidelity"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert!((r["probabilities"]["01"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn missing_circuit_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = nmrqc(dir.path(), &["simulate", "--circuit", "nowhere.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_line(&out);
    assert!(e["error"]["message"].as_str().unwrap().contains("nowhere.json"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn error_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Validation: three-bit secret on a two-qubit machine.
    let out = nmrqc(dir.path(), &["algorithm", "bv", "--a", "101"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"]["exit_code"], 2);
    // Bad flag.
    assert_eq!(nmrqc(dir.path(), &["--nonsense"]).status.code(), Some(2));
    // Numerical: no drive, nothing to fit.
    let out = nmrqc(dir.path(), &["experiment", "rabi", "--amp-hz", "1e-9", "--max-duration", "1e-4"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_line(&out)["error"]["kind"], "fit");
    // Output I/O: the output directory is a file.
    fs::write(dir.path().join("blocked"), "x").unwrap();
    let out = nmrqc(dir.path(), &["algorithm", "grover4", "--target", "1", "--out", "blocked"]);
    assert_eq!(out.status.code(), Some(4));
    // Unknown preset.
    assert_eq!(nmrqc(dir.path(), &["--machine", "nope", "algorithm", "grover4", "--target", "1"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let o = nmrqc(
            dir.path(),
            &[
                "grape", "--machine", "gemini", "--gate", "X90", "--qubit", "1", "--segments", "20",
                "--duration", "2e-4", "--iterations", "30", "--seed", "11", "--out", out,
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a");
    run("b");
    for f in ["grape.json", "grape.csv"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
    let csv = fs::read_to_string(dir.path().join("a/grape.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("segment_index,channel,u_x_hz,u_y_hz"));
    assert_eq!(csv.lines().count(), 1 + 20 * 2);
    let meta = json(&dir.path().join("a/grape.json"));
    assert_eq!(meta["seed"], 11);
    assert!(meta["final_fidelity"].is_number() && meta["iterations"].is_number());
}

#[test]
fn tomography_and_compile_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bell.json"), BELL_PHI_MINUS).unwrap();
    assert!(nmrqc(dir.path(), &["tomography", "--circuit", "bell.json", "--out", "t"]).status.success());
    let state = json(&dir.path().join("t/state.json"));
    assert!((state["re"][1][2].as_f64().unwrap() + 0.5).abs() < 1e-8);
    let tomo = json(&dir.path().join("t/tomography.json"));
    assert_eq!(tomo["settings"].as_array().unwrap().len(), 9);
    let spec = fs::read_to_string(dir.path().join("t/spectrum_1H.csv")).unwrap();
    assert_eq!(spec.lines().next(), Some("freq_hz,re,im,magnitude"));
    let fid = fs::read_to_string(dir.path().join("t/fid_31P.csv")).unwrap();
    assert_eq!(fid.lines().next(), Some("t_s,re,im"));

    // Round trip the reconstructed state through --state.
    assert!(nmrqc(dir.path(), &["tomography", "--state", "t/state.json", "--out", "t2"]).status.success());
    let again = json(&dir.path().join("t2/state.json"));
    for part in ["re", "im"] {
        for i in 0..4 {
            for j in 0..4 {
                let a = state[part][i][j].as_f64().unwrap();
                let b = again[part][i][j].as_f64().unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    assert!(nmrqc(dir.path(), &["compile", "--circuit", "bell.json", "--out", "c"]).status.success());
    let program = json(&dir.path().join("c/program.json"));
    let events = program["events"].as_array().unwrap();
    assert!(events.iter().any(|e| e["type"] == "delay"));
    assert!(events.iter().all(|e| ["rf", "delay"].contains(&e["type"].as_str().unwrap())));
}

#[test]
fn experiments_write_scans() {
    let dir = tempfile::tempdir().unwrap();
    assert!(nmrqc(dir.path(), &["experiment", "t1", "--channel", "31P", "--out", "e"]).status.success());
    let fit = json(&dir.path().join("e/t1.json"));
    assert_eq!(fit["model"], "inversion_recovery");
    assert!((fit["params"]["tau"].as_f64().unwrap() - 6.0).abs() / 6.0 < 0.02);
    let csv = fs::read_to_string(dir.path().join("e/t1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,fit_y"));
    assert_eq!(csv.lines().count(), 14);

    assert!(nmrqc(dir.path(), &["experiment", "rabi", "--amp-hz", "25000", "--out", "r"]).status.success());
    let rabi = json(&dir.path().join("r/rabi.json"));
    assert!((rabi["t180_s"].as_f64().unwrap() - 2e-5).abs() / 2e-5 < 5e-3);

    assert!(nmrqc(dir.path(), &["experiment", "pps", "--out", "p"]).status.success());
    let pps = json(&dir.path().join("p/pps.json"));
    for k in ["ZI", "IZ", "ZZ"] {
        assert!((pps["deviation"][k].as_f64().unwrap() - 0.25).abs() < 1e-9);
    }
    // Spatial averaging needs two qubits.
    assert_eq!(nmrqc(dir.path(), &["--machine", "triangulum", "experiment", "pps"]).status.code(), Some(2));
}

#[test]
fn algorithm_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ok = |args: &[&str]| {
        let o = nmrqc(dir.path(), args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    ok(&["algorithm", "deutsch", "--case", "f4", "--out", "d"]);
    assert_eq!(json(&dir.path().join("d/report.json"))["derived"]["verdict"], "balanced");

    ok(&["algorithm", "count", "--case", "m2", "--l", "1,2,3", "--out", "k"]);
    assert_eq!(json(&dir.path().join("k/report.json"))["derived"]["m"], 2);

    ok(&["algorithm", "bell", "--state", "phi-", "--recipe", "cy", "--path", "pulse", "--out", "b"]);
    assert!(json(&dir.path().join("b/report.json"))["fidelity"].as_f64().unwrap() > 1.0 - 1e-6);

    ok(&["algorithm", "qho", "--initial", "n0", "--omega-t", "0.5,1.0", "--out", "q"]);
    let q = json(&dir.path().join("q/report.json"));
    assert_eq!(q["reports"].as_array().unwrap().len(), 2);
    assert_eq!(fs::read_to_string(dir.path().join("q/qho.csv")).unwrap().lines().count(), 3);

    ok(&["algorithm", "dqc1", "--qubits", "2", "--seed", "5", "--out", "x"]);
    let d = json(&dir.path().join("x/report.json"));
    let diff = (d["derived"]["trace_re"].as_f64().unwrap() - d["derived"]["exact_re"].as_f64().unwrap()).abs();
    assert!(diff < 1e-9);

    ok(&["algorithm", "cnot-table", "--direction", "21", "--path", "pulse", "--out", "t"]);
    let t = json(&dir.path().join("t/report.json"));
    assert_eq!(t["rows"][1]["input"], "01");
    assert_eq!(t["rows"][1]["output"], "11");

    ok(&["algorithm", "bv", "--a", "11", "--shots", "100", "--seed", "3", "--out", "s"]);
    let shots = json(&dir.path().join("s/shots.json"));
    assert_eq!(shots["counts"]["11"], 100);
}
