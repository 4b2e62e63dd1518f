use std::process::{Command, Output};

use cuspmf::mfcore::canonical_phi;
use cuspmf::ring::PolyMatrix;
use cuspmf::words::{CyclicWord, Unit};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspmf")).args(args).output().expect("spawn cuspmf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let o = run(&a);
    assert_eq!(o.status.code(), Some(0), "{:?}: {}", args, String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn band_to_loop_worked_example() {
    let o = run(&["convert", "band-to-loop", "--word", "6,0,2,-1,0,-3,0,0,5,0,-2,1,-1,3,4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("sign word       1,1,1,0,0,0,0,0,1,0,0,1,0,1,1"), "{}", s);
    assert!(s.contains("correction word 2,2,1,0,-1,-1,-1,0,0,0,0,0,1,1,2"), "{}", s);
    assert!(s.contains("loop word       8,2,3,-1,-1,-4,-1,0,5,0,-2,1,0,4,6"), "{}", s);
    assert!(s.contains("λ' (loop)       -λ"), "{}", s);
}

#[test]
fn conversion_round_trip_through_json() {
    let v = json(&["convert", "band-to-loop", "--word", "6,0,2,-1,0,-3,0,0,5,0,-2,1,-1,3,4"]);
    let lw: Vec<String> = v["loop"]["entries"].as_array().unwrap().iter().map(|e| e.to_string()).collect();
    let back = json(&["convert", "loop-to-band", "--word", &lw.join(","), "--holonomy", "-1,1"]);
    assert_eq!(back["band"]["entries"], v["band"]["entries"]);
    assert_eq!(back["band"]["lambda"], v["band"]["lambda"]);
}

#[test]
fn normalize_example() {
    let o = run(&["normalize", "--word", "2,2,2,1,2,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-2,-1,-1");
    let v = json(&["normalize", "--word", "2,2,2,1,2,2"]);
    assert_eq!(v["normal"]["entries"], serde_json::json!([-2, -1, -1]));
}

#[test]
fn canonical_check_line() {
    let o = run(&["mf", "canonical", "--word", "3,3,3", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("det = xyz(1 - λxyz): OK"), "{}", stdout(&o));
}

#[test]
fn matrix_json_round_trips() {
    let v = json(&["mf", "canonical", "--word", "3,-2,2", "--lambda", "1,1"]);
    let phi = PolyMatrix::from_json(&v["phi"]).unwrap();
    let w = CyclicWord::loop_word(&[3, -2, 2]).unwrap();
    assert_eq!(phi, canonical_phi(&w, &Unit::lambda()));
    assert_eq!(phi.to_json(), v["phi"]);
}

#[test]
fn equiv_agrees_with_normal_forms() {
    let v = json(&["equiv", "--word", "2,2,2,1,2,2", "--other", "-2,-1,-1"]);
    assert_eq!(v["conjugate_equal"], Value::Bool(true));
    assert_eq!(v["normal_forms_agree"], Value::Bool(true));
    let v = json(&["equiv", "--word", "2,3,2", "--other", "3,2,2"]);
    assert_eq!(v["conjugate_equal"], Value::Bool(false));
}

#[test]
fn strips_worked_word() {
    let v = json(&["strips", "--word", "2,3,2", "--start", "p", "--max-len", "30"]);
    let mut got: Vec<(String, String)> =
        v.as_array().unwrap().iter().map(|h| (h["end"].as_str().unwrap().into(), h["monomial"].as_str().unwrap().into())).collect();
    got.sort();
    assert_eq!(got, vec![("s".into(), "z".into()), ("u".into(), "x".into())]);
}

#[test]
fn resolve_reaches_canonical() {
    let v = json(&["resolve", "--word", "1,0,0,-2,0,0", "--trace"]);
    assert_eq!(v["ok"], Value::Bool(true));
    assert!(v["stages"].as_array().unwrap().len() >= 5);
}

#[test]
fn t32_check_reports_convention() {
    let v = json(&["t32", "--m", "3", "--check"]);
    assert_eq!(v["check"]["convention"], Value::String("x^3+y^2+xyz".into()));
    assert_eq!(v["check"]["ok"], Value::Bool(true));
    let o = run(&["t32", "--m", "1", "--check", "--presentation", "I"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("AR swap: OK"));
}

#[test]
fn reduce_from_file() {
    let dir = std::env::temp_dir().join(format!("cuspmf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let v = json(&["mf", "canonical", "--word=-2,-2,1"]);
    let input = serde_json::json!({"phi": v["phi"], "psi": v["psi"], "scale": v["u"]});
    let path = dir.join("mf.json");
    std::fs::write(&path, input.to_string()).unwrap();
    let out = json(&["mf", "reduce", "--in", path.to_str().unwrap(), "--row", "2", "--col", "3"]);
    assert_eq!(out["valid"], Value::Bool(true));
    assert_eq!(PolyMatrix::from_json(&out["phi"]).unwrap().rows, 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["normalize", "--word", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["normalize", "--word", "a,b,c"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["convert", "loop-to-band", "--word", "1,1,1"]).status.code(), Some(2));
    assert_eq!(run(&["t32", "--m", "0"]).status.code(), Some(2));
    assert_eq!(run(&["strips", "--word", "1,0,0,1,0,0"]).status.code(), Some(2));
}
