use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ontic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn spectrum_of_twelve_wheel() {
    let out = ontic(&["spectrum", "--n", "12", "--dt", "1.0", "--branch", "zero2pi", "--out", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let phases: Vec<f64> = v["eigenphases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(phases.len(), 12);
    for (k, p) in phases.iter().enumerate() {
        assert!((p - std::f64::consts::TAU * k as f64 / 12.0).abs() < 1e-9);
    }
}

#[test]
fn json_key_order_is_fixed() {
    let out = ontic(&["cogwheel", "--n", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys = ["\"tool_version\"", "\"subcommand\"", "\"config_echo\"", "\"seed\"", "\"verdict\"", "\"dim\"", "\"meta\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
}

#[test]
fn conserve_passes() {
    let out = ontic(&["conserve", "--dim", "64", "--steps", "100", "--trials", "1000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "pass");
    assert!(v["max_deviation"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["seed"], 42);
}

#[test]
fn bell_quadrature_emits_components() {
    let out = ontic(&["bell", "--a", "0", "--b", "22.5", "--aprime", "45", "--bprime", "67.5", "--method", "quad", "--grid", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["S"].is_number());
    for k in ["ab", "abp", "apb", "apbp"] {
        assert!(v["E"][k].is_number());
        assert!(v["std_error"][k].is_number());
    }
    assert_eq!(v["classical_bound"], 2.0);
    assert_eq!(v["tsirelson_bound"], 2.8284271247461903);
    assert!(v["quantum_reference_S"].is_number());
}

#[test]
fn missing_n_exits_two_naming_n() {
    let out = ontic(&["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n: required"));
}

#[test]
fn small_grid_is_rejected() {
    let out = ontic(&["bell", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid: out of range"));
}

#[test]
fn unknown_config_key_is_named() {
    let path = scratch("unknown_key.json", r#"{"subcommand":"cogwheel","parameters":{"n":3,"wheel":2}}"#);
    let out = ontic(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wheel"));

    let path = scratch("foreign_key.json", r#"{"subcommand":"cogwheel","parameters":{"n":3,"grid":9}}"#);
    let out = ontic(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));
}

#[test]
fn flags_override_config_file() {
    let path = scratch("override.json", r#"{"subcommand":"cogwheel","parameters":{"n":3,"steps":2},"seed":5}"#);
    let out = ontic(&["--config", path.to_str().unwrap(), "cogwheel", "--n", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dim"], 7);
    assert_eq!(v["steps"], 2);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config_echo"]["parameters"]["n"], 7);
}

#[test]
fn beable_failure_exits_one() {
    let out = ontic(&["beables", "--l", "3", "--ops", "X@0,Z@0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["violation"]["s"], 0);
    assert_eq!(v["violation"]["t"], 0);
    let out = ontic(&["beables", "--l", "4"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn universe_file_spectrum() {
    let path = scratch("swap.json", r#"{"dim":2,"target":[1,0],"phase":[0.0,0.0]}"#);
    let out = ontic(&["spectrum", "--universe", path.to_str().unwrap(), "--branch", "minuspi2pi"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["eigenphases"][0], 0.0);
    assert!((v["eigenphases"][1].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);

    let bad = scratch("bad.json", r#"{"dim":2,"target":[0,0]}"#);
    let out = ontic(&["spectrum", "--universe", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lightcone_csv_has_config_line_and_header() {
    let out = ontic(&["lightcone", "--l", "3", "--tmax", "2", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("x,x_prime,t,t_prime,separation,commutator_norm"));
    assert_eq!(lines.count(), 3 * 3 * 3 * 3);
}

#[test]
fn output_path_is_written() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("wheel.csv");
    let out = ontic(&["cogwheel", "--n", "3", "--out", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with("3,0\n"));
}
