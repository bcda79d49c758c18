mod common;

use std::process::{Command, Output};

use common::fixture_path;
use serde_json::Value;

fn morphic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture_arg(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn classify_fix_a_json() {
    let out = morphic(&["classify", &fixture_arg("fix_a"), "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["class"], "PolyExponent");
    assert_eq!(v["exponent"], "3/2");
    assert_eq!(v["fired_rule"], "Prop1_4");
    assert_eq!(v["k_star"], 2);
    assert!(v["counterexample"].is_null());
    assert_eq!(v["horizons"]["horizon"], 512);
    assert_eq!(v["horizons"]["window"], 5);
    for key in ["class", "exponent", "fired_rule", "k_star", "horizons", "counterexample", "evolutions"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(!v["evolutions"].as_array().unwrap().is_empty());
}

#[test]
fn classify_order_two_is_constant() {
    let out = morphic(&["classify", &fixture_arg("order_two"), "--json"]);
    let v = json(&out);
    assert_eq!(v["class"], "Constant");
    assert!(v["exponent"].is_null());
    assert_eq!(v["fired_rule"], "Prop1_5");
}

#[test]
fn measure_guard_is_a_usage_error() {
    let out = morphic(&["measure", &fixture_arg("fix_a"), "--prefix-len", "100", "--ns", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn measure_writes_csv_and_json() {
    let dir = std::env::temp_dir().join(format!("morphic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("a.csv");
    let out = morphic(&[
        "measure",
        &fixture_arg("fix_a"),
        "--prefix-len",
        "20000",
        "--ns",
        "16,32,64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p_n");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("16,"));
    let out = morphic(&["measure", &fixture_arg("fix_a"), "--prefix-len", "20000", "--ns", "16,32,64", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["prefix_len"], 20000);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["n"], 16);
    assert_eq!(
        entries[0]["p_n"].as_u64().unwrap().to_string(),
        lines[1].split(',').nth(1).unwrap()
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_fix_c_agrees() {
    let out = morphic(&["verify", &fixture_arg("fix_c")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("fitted slope: 1.8"), "{text}");
    assert!(text.contains("agree"));
}

#[test]
fn orders_and_normalize() {
    let out = morphic(&["orders", &fixture_arg("fix_b")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("a ") && l.contains("inf")), "{text}");
    let out = morphic(&["normalize", &fixture_arg("fix_c")]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("power: 1"));
    assert!(text.contains("final periods: {c}"));
    let out = morphic(&["normalize", &fixture_arg("fix_b"), "--emit"]);
    let emitted: morphic::MorphicSystem = String::from_utf8_lossy(&out.stdout).parse().unwrap();
    let again = morphic::normalization::normalize(&emitted).unwrap();
    assert_eq!(again.report.power, 1);
}

#[test]
fn blocks_reports_both_counts() {
    let out = morphic(&["blocks", &fixture_arg("fix_e"), "-k", "2", "--prefix-len", "20000", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["observed_evolutions"], v["closure_evolutions"]);
    let evolutions = v["evolutions"].as_array().unwrap();
    let d = evolutions.iter().find(|e| e["origin"] == "B[D]B").unwrap();
    assert_eq!(d["anatomy"]["right_preperiod"], "cEEeeeeeeEEcEEeeEEcEEC");
    assert_eq!(d["case_right"], "CaseI");
    let out = morphic(&["blocks", &fixture_arg("fix_c"), "-k", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["classify".to_string(), fixture_arg("fix_e"), "--json".into()],
        vec!["blocks".to_string(), fixture_arg("fix_d"), "-k".into(), "1".into(), "--prefix-len".into(), "5000".into()],
        vec!["measure".to_string(), fixture_arg("fix_b"), "--prefix-len".into(), "10000".into(), "--ns".into(), "8,16".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = morphic(&args);
        let second = morphic(&args);
        assert_eq!(first.stdout, second.stdout);
        assert!(!first.stdout.is_empty());
    }
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(morphic(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(morphic(&["classify", "/nonexistent.morph"]).status.code(), Some(2));
    assert_eq!(morphic(&["classify", &fixture_arg("fix_a"), "--window", "2"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("morphic-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.morph");
    std::fs::write(&bad, "alphabet: a b\naxiom: a\nmorphism:\n a -> b a\n b -> b\ncoding:\n a -> a\n b -> b\n").unwrap();
    let out = morphic(&["orders", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(morphic(&["--help"]).status.code(), Some(0));
}
