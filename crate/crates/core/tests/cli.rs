use std::process::{Command, Output};

use serde_json::Value;

fn ck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ck"))
        .args(args)
        .env_remove("CK_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_wall_time(mut v: Value) -> Value {
    v["metadata"].as_object_mut().unwrap().remove("wall_time");
    v
}

#[test]
fn classify_zero_character_is_point() {
    let out = ck(&["classify", "--signature", "1,1", "--h", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["subcommand"], "classify");
    assert_eq!(v["result"]["radius_kind"], "zero");
    assert_eq!(v["result"]["degeneracy"], "point");
    for key in ["seed", "version", "wall_time"] {
        assert!(v["metadata"].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn classify_accepts_negative_components() {
    let out = ck(&["classify", "--signature", "d,i", "--h", "-1,0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["result"].get("radius_kind").is_some());
}

#[test]
fn invalid_token_is_named() {
    let out = ck(&["classify", "--signature", "1,x", "--h", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('x'));
}

#[test]
fn short_signature_is_rejected() {
    assert_eq!(ck(&["verify", "--signature", "1"]).status.code(), Some(2));
}

#[test]
fn csv_only_for_orbit_table() {
    let out = ck(&["verify", "--signature", "1,1", "--trials", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_euclidean_plane() {
    let out = ck(&["verify", "--signature", "d,1", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("contraction_")));
}

#[test]
fn rep_check_heisenberg() {
    let out = ck(&["rep-check", "--signature", "d,d", "--R", "1.5", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("heisenberg")));
    assert!(names.iter().any(|n| n.starts_with("opposite_sign_")));
}

#[test]
fn rep_check_rejects_missing_imaginary_family() {
    let out = ck(&["rep-check", "--signature", "d,1", "--family", "imaginary", "--rho", "1", "--axis", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn orbit_table_csv() {
    let out = ck(&["orbit-table", "--n", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "radius_kind"));
    assert_eq!(rdr.records().count(), 30);
}

#[test]
fn runs_are_deterministic() {
    let args = ["measure", "--signature", "1,1", "--samples", "2000", "--seed", "9"];
    let a = without_wall_time(json(&ck(&args)));
    let b = without_wall_time(json(&ck(&args)));
    assert_eq!(a, b);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ck"))
        .args(["measure", "--signature", "1,1", "--samples", "500"])
        .env("CK_SEED", "41")
        .output()
        .unwrap();
    assert_eq!(json(&out)["metadata"]["seed"], 41);
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = ck(&["classify", "--signature", "1,i", "--h", "0,1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["subcommand"], "classify");
}

#[test]
fn library_entry_point() {
    assert_eq!(ck_core::cli::run(&["ck", "orbit-table", "--n", "2", "-o", "/dev/null"]), 0);
    assert_eq!(ck_core::cli::run(&["ck", "orbit-table", "--n", "9"]), 2);
}
