use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ribbonsum")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let value = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    (out.status.code().unwrap(), value)
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn torus_info() {
    let (code, v) = json(&["graph", "info", "--graph", &data("torus.json")]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!((r["V"].as_i64(), r["n"].as_i64(), r["F"].as_i64(), r["chi"].as_i64()),
        (Some(1), Some(2), Some(1), Some(0)));
    assert_eq!(r["dual"]["n"], 2);
}

#[test]
fn loop_and_segment_faces() {
    let (_, seg) = json(&["graph", "info", "--graph", &data("segment.json")]);
    let (_, lp) = json(&["graph", "info", "--graph", &data("loop.json")]);
    assert_eq!(seg["result"]["F"], 1);
    assert_eq!(lp["result"]["F"], 2);
}

#[test]
fn su4_verification_passes() {
    let (code, v) = json(&["verify", "su-4", "--N", "2", "--lambda", "1"]);
    assert_eq!(code, 0, "{v}");
    let r = &v["result"];
    assert_eq!(r["pass"], true);
    assert!(r["z"].as_f64().unwrap() <= 4.0);
    assert_eq!(r["mc"]["samples"], 200_000);
    assert_eq!(v["defaults"]["samples"], 200_000);
}

#[test]
fn degenerate_su4_case_uses_absolute_mode() {
    let (code, v) = json(&["verify", "su-4", "--N", "2", "--lambda", "1,1", "--samples", "2000"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["mode"], "absolute");
}

#[test]
fn scalar_hciz() {
    let (code, v) = json(&["series", "hciz", "--N", "1", "--order", "20", "--a", "0.5", "--b", "0.5"]);
    assert_eq!(code, 0);
    let (re, im) = complex(&v["result"]["value"]);
    assert!((re - 0.25f64.exp()).abs() <= 1e-10 && im == 0.0);
    assert_eq!(v["settings"]["order"], 20);
}

#[test]
fn scalar_bgw_decomposition() {
    let (code, v) = json(&[
        "series", "bgw", "--group", "su", "--a", "0.5", "--b", "0.4", "--beta", "0.3",
        "--order", "16", "--qmax", "8",
    ]);
    assert_eq!(code, 0);
    let r = &v["result"];
    let (re, _) = complex(&r["value"]);
    assert!((re - (0.3f64 * 0.9).exp()).abs() <= 1e-8);
    assert_eq!(r["q_decomposition"].as_array().unwrap().len(), 17);
}

#[test]
fn su_with_two_vertices_is_a_scope_error() {
    let (code, v) = json(&["series", "z", "--model", &data("segment_su.json")]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "scope");
    let text = run(&["series", "z", "--model", &data("segment_su.json")]);
    assert_eq!(text.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&text.stderr).contains("scope error"));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(run(&["verify", "orth-9"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "orth-2b", "--q", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["series", "hciz", "--a", "0.1,0.2", "--b", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["graph", "info", "--graph", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["series", "hciz", "--N", "1", "--order", "6", "--step", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_corner_file_names_the_field() {
    let dir = std::env::temp_dir().join(format!("ribbonsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let corners = dir.join("bad.json");
    std::fs::write(&corners, r#"{"N": 1, "corners": {"1": [[0.5]], "-1": [[0.5, 1]]}}"#).unwrap();
    let c = corners.to_string_lossy().into_owned();
    let (code, v) = json(&["series", "z", "--graph", &data("loop.json"), "--corners", &c]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert!(v["error"]["message"].as_str().unwrap().contains("corners.-1"), "{v}");
}

#[test]
fn model_series_matches_its_verification() {
    let args = ["--model", &data("loop_model.json"), "--order", "4"];
    let (code, series) = json(&[&["series", "z"][..], &args].concat());
    assert_eq!(code, 0);
    let (code, report) = json(&[&["verify", "z-integral", "--samples", "50000"][..], &args].concat());
    assert_eq!(code, 0, "{report}");
    assert_eq!(series["result"]["value"], report["result"]["closed"]);
}

#[test]
fn kp_checks() {
    let (code, v) = json(&["kp-check", "--tau", &data("tau_hypergeometric.json")]);
    assert_eq!(code, 0);
    assert!(v["result"]["relative"].as_f64().unwrap() <= 1e-4);
    assert_eq!(v["settings"]["step"], 0.2);
    let (code, v) = json(&["kp-check", "--tau", &data("tau_exponential.json")]);
    assert_eq!(code, 0);
    assert!(v["result"]["absolute"].as_f64().unwrap() <= 1e-8);
    let (code, _) = json(&["kp-check", "--tau", &data("tau_hypergeometric.json"), "--order", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn json_output_is_reproducible() {
    let args = ["--json", "verify", "hciz", "--N", "3", "--order", "6", "--samples", "20000", "--seed", "5"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let other = run(&["--json", "verify", "hciz", "--N", "3", "--order", "6", "--samples", "20000", "--seed", "6"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn text_reports_print_defaults() {
    let out = run(&["series", "hciz", "--N", "2", "--order", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("defaults: order=10 samples=200000 seed=0 q_max=1 step=0.2"), "{text}");
    assert!(text.contains("settings: N=2 order=3"));
}
