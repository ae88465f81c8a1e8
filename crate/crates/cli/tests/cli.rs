use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn weillift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weillift"))
        .args(args)
        .env_remove("WEILLIFT_PREC")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = weillift(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn check_schema(name: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft7)
        .compile(&schema)
        .expect("schema compiles");
    let errors: Vec<String> = match validator.validate(v) {
        Ok(()) => Vec::new(),
        Err(errs) => errs.map(|e| e.to_string()).collect(),
    };
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn invariant_vector_with_check() {
    let v = json_ok(&["invariant-vector", "--D1", "-3", "--D2", "-4", "--N", "1", "--check"]);
    check_schema("invariant-vector", &v);
    assert_eq!(v["module_order"], 432);
    assert_eq!(v["report"]["hperp_order"], 108);
    assert!(v["residual_S"].as_f64().unwrap() < 1e-10);
    assert!(v["residual_T"].as_f64().unwrap() < 1e-10);
    assert!(!v["support"].as_array().unwrap().is_empty());
}

#[test]
fn shintani_lift_delta() {
    let v = json_ok(&["shintani-lift", "--newform", "delta", "--twist", "1", "--m-list", "1,4,5"]);
    check_schema("shintani-lift", &v);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let t1 = rows[0]["value_re"].as_f64().unwrap();
    assert!((t1 - 1.5448793603950e-3).abs() < 1e-12);
}

#[test]
fn newform_from_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("delta.json");
    std::fs::write(&path, weillift::qexp::Newform::delta(200).to_json()).unwrap();
    let newform: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    check_schema("newform", &newform);
    let args = |nf: &str| vec!["shintani-lift".to_string(), "--newform".into(), nf.into(), "--twist".into(), "1".into(), "--m-list".into(), "5".into()];
    let a = weillift(&args(path.to_str().unwrap()).iter().map(String::as_str).collect::<Vec<_>>());
    let b = weillift(&args("delta").iter().map(String::as_str).collect::<Vec<_>>());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lfunc_eval_fricke_toggle() {
    let v = json_ok(&["lfunc-eval", "--newform", "eta6", "--D1", "-8", "--D2", "-11", "--N", "3", "--s", "1,0.5"]);
    check_schema("lfunc-eval", &v);
    assert_eq!(v["fricke"], -1);
    assert_eq!(v["value_re"].as_f64(), Some(0.0));
    let even = weillift(&["lfunc-eval", "--newform", "delta", "--D1", "-3", "--D2", "-4", "--N", "1", "--s", "6.5"]);
    assert_eq!(even.status.code(), Some(2));
}

#[test]
fn cm_norm_singular_moduli() {
    let v = json_ok(&["cm-norm", "--D1", "-3", "--D2", "-4", "--prec", "128"]);
    check_schema("cm-norm", &v);
    // (j(i) - j(rho))^4 = 1728^4
    assert_eq!(v["nearest_integer"], "8916100448256");
    assert_eq!(v["cycle_size"], 4);
}

#[test]
fn green_values() {
    let v = json_ok(&["green", "--s", "2", "--N", "3", "--z1", "0.1,1.2", "--z2", "0.3,0.9"]);
    check_schema("green", &v);
    let w = json_ok(&["green", "--s", "2", "--N", "3", "--z1", "0.3,0.9", "--z2", "0.1,1.2"]);
    let (a, b) = (v["value_re"].as_f64().unwrap(), w["value_re"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    let g = json_ok(&["green", "--s", "2", "--principal", "1:1", "--z1", "0.1,1.2", "--z2", "0.3,0.9"]);
    check_schema("green", &g);
}

#[test]
fn output_independent_of_threads() {
    let args = ["shintani-lift", "--newform", "eta6", "--twist", "-3", "--m-list", "4,7,8"];
    let a = weillift(&[&args[..], &["--threads", "1"]].concat());
    let b = weillift(&[&args[..], &["--threads", "4"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = weillift(&["green", "--z1", "0,1", "--z2", "0.2,1", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    check_schema("green", &v);
}

#[test]
fn exit_codes() {
    assert_eq!(weillift(&["bogus"]).status.code(), Some(2));
    assert_eq!(weillift(&["cm-norm", "--D1", "-3", "--D2", "-4", "--unknown"]).status.code(), Some(2));
    assert_eq!(weillift(&["cm-norm", "--N", "2", "--D1", "-3", "--D2", "-4"]).status.code(), Some(2));
    assert_eq!(weillift(&["cm-norm", "--D1", "-3", "--D2", "-4", "--prec", "16"]).status.code(), Some(2));
    assert_eq!(weillift(&["shintani-lift", "--newform", "nosuch", "--twist", "1", "--m-list", "1"]).status.code(), Some(2));
    assert_eq!(weillift(&["verify", "12"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_weillift"))
        .args(["green", "--z1", "0,1", "--z2", "0.2,1"])
        .env("WEILLIFT_PREC", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_table() {
    let out = weillift(&["verify", "2", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.contains("PASS")));
}
