use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlspectrum"))
        .args(args)
        .env_remove("MLSPECTRUM_PRECISION")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Every number in a report is either an exact integer or a decimal string.
fn no_binary_floats(v: &Value) -> bool {
    match v {
        Value::Number(n) => !n.is_f64(),
        Value::Array(a) => a.iter().all(no_binary_floats),
        Value::Object(o) => o.values().all(no_binary_floats),
        _ => true,
    }
}

#[test]
fn spectrum_quadratic() {
    let out = run(&["spectrum", "--poly", "X^2-20X+82", "--K", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    let r = &doc["result"];
    assert_eq!(r["e_k"].as_array().unwrap().len(), 7);
    assert_eq!(r["ordered"], Value::Bool(true));
    assert_eq!(r["conditions"]["cor"]["verdict"], "holds");
    let e: f64 = r["e"][0].as_str().unwrap().parse().unwrap();
    assert!((e - 0.011704886761021037).abs() < 1e-15);
    let e0: f64 = r["e_k"][0][0].as_str().unwrap().parse().unwrap();
    assert!((e0 - 1.0 / 103.0).abs() < 1e-15);
    assert!(no_binary_floats(&doc));
    assert_eq!(doc["provenance"]["precision_digits"], 60);
}

#[test]
fn conditions_cubic() {
    let out = run(&["conditions", "--poly", "X^3+2X^2+6X-2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["flags"]["eqn319"], Value::Bool(true));
    assert_eq!(doc["result"]["flags"]["newbeta"], Value::Bool(false));
    assert!(no_binary_floats(&doc));
}

#[test]
fn validate_repeated_root() {
    let out = run(&["validate", "--poly", "X^2+2X+1"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["squarefree"], Value::Bool(false));
}

#[test]
fn hypothesis_failures_exit_3_with_diagnostics() {
    for args in [
        ["spectrum", "--poly", "X^3+2X^2+6X-2"],
        ["spectrum", "--poly", "X^2-5X+5"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(diag["error"]["kind"], "hypothesis");
    }
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["roots", "--poly", "X^2-20X+82", "--precision", "20"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["roots", "--poly", "X^2+*3"]);
    assert_eq!(out.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"]["kind"], "parse");
    let out = run(&["rho", "--poly", "X^2-20X+82", "--window=5,-5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mlspectrum"))
        .args(["roots", "--poly", "X^2-20X+82"])
        .env("MLSPECTRUM_PRECISION", "45")
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["provenance"]["precision_digits"], 45);
}

#[test]
fn reports_are_deterministic() {
    let args = ["encode", "--poly", "X^3+2X^2+6X-2", "--window", "0,40", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = json_of(&a);
    assert_eq!(doc["result"]["reconstruction"]["consistent"], Value::Bool(true));
    let c = run(&["encode", "--poly", "X^3+2X^2+6X-2", "--window", "0,40", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.csv");
    let out = run(&[
        "rho",
        "--poly",
        "X^2-20X+82",
        "--window=-3,3",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,rho,abs_rho");
    assert_eq!(lines.len(), 8);
    assert!(lines[4].starts_with("0,-1.2195121951219512195"));
    // not every command has a CSV rendering
    let out = run(&["decode", "--poly", "X^2-20X+82", "--word", "[| 1]", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn orbit_and_decode() {
    let out = run(&["orbit", "--poly", "X^2-20X+82", "--window", "0,20", "--params", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    // the trace orbit is integral: every x_n is an integer
    assert!(doc["result"]["eps"].as_array().unwrap().iter().all(|e| e == "0"));
    assert_eq!(doc["result"]["isolated_point"]["limsup_contains_zero"], Value::Bool(true));

    let out = run(&["decode", "--poly", "X^2-20X+82", "--word", "0^inf [1 -2 | 0 1]"]);
    assert_eq!(out.status.code(), Some(0));
    let d: f64 = json_of(&out)["result"]["defect"].as_str().unwrap().parse().unwrap();
    assert!(d < 1e-20);
}

#[test]
fn identities_and_realize() {
    let out = run(&["identities", "--poly", "X^2-20X+82", "--window=-40,40"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json_of(&out)["result"];
    for key in ["convolution_defect", "window_inverse_defect_ab", "window_inverse_defect_ba", "expansive_closed_form_defect"] {
        let v: f64 = r[key].as_str().unwrap().parse().unwrap();
        assert!(v < 1e-45, "{key} = {v}");
    }
    assert_eq!(r["residue_at_infinity_integral"], Value::Bool(true));

    let out = run(&["realize", "--poly", "X^2-20X+82", "--R", "5,10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["strictly_increasing"], Value::Bool(true));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["result"]["failed"], 0);
}
