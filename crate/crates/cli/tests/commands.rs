use std::path::PathBuf;
use std::process::Command;

use clap::Parser;
use qhm::commands::{parse_number, run, Cli};
use qhm::format::{self, CoalgebraDoc};
use qhm_core::rational;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_string_lossy().into_owned()
}

fn qhm(args: &[&str]) -> Result<String, qhm::error::CliError> {
    let mut full = vec!["qhm"];
    full.extend_from_slice(args);
    run(&Cli::try_parse_from(full).expect("arguments parse"))
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&qhm(args).unwrap()).unwrap()
}

#[test]
fn bd_reports_root_distance() {
    for (file, eps) in [("split_eps_0.1.json", "1/10"), ("split_eps_0.25.json", "1/4")] {
        let v = json(&["bd", "--in", &fixture(file), "--eps", "1e-9", "--backend", "lp"]);
        assert_eq!(v["matrix"][0][3], eps);
        assert_eq!(v["provenance"], "bd");
        assert_eq!(v["converged"], true);
    }
}

#[test]
fn bd_csv_has_header_and_rows() {
    let csv = qhm(&["bd", "--in", &fixture("small_lts.json"), "--format", "csv"]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "state,p,p1,q,q1,q2,d");
    assert_eq!(lines.len(), 7);
}

#[test]
fn ld_lists_basis_and_saturation() {
    let v = json(&["ld", "--in", &fixture("small_lts.json"), "--depth", "6"]);
    assert!(v["basis"].as_array().unwrap().len() >= 2);
    assert!(v["saturated_at"].is_u64());
    let bd = json(&["bd", "--in", &fixture("small_lts.json")]);
    assert_eq!(v["matrix"], bd["matrix"]);
}

#[test]
fn distinguish_gives_depth_two_formula() {
    let v = json(&["distinguish", "--in", &fixture("split_eps_0.25.json"), "--x", "r", "--y", "r2", "--depth", "2"]);
    assert_eq!(v["gap"], "1/4");
    assert_eq!(v["depth"], 2);
    assert!(qhm(&["distinguish", "--in", &fixture("split_eps_0.25.json"), "--x", "r", "--y", "zz"]).is_err());
}

#[test]
fn sw_on_diamond4_passes() {
    let v = json(&["check", "sw", "--quantale", "diamond4", "--op", "id", "--trials", "50", "--seed", "7"]);
    assert_eq!(v["passed"], 50);
    let seed = v["trials"][4]["seed"].as_u64().unwrap().to_string();
    let replay = json(&["check", "sw", "--quantale", "diamond4", "--op", "id", "--replay", &seed]);
    assert_eq!(replay["trials"][0]["seed"], v["trials"][4]["seed"]);
    assert_eq!(replay["trials"][0]["c_dense"], v["trials"][4]["c_dense"]);
    let d = json(&["check", "sw", "--quantale", "bool2", "--decomposition", "--trials", "20"]);
    assert_eq!(d["passed"], 20);
}

#[test]
fn generated_lts_is_adequate() {
    let dir = std::env::temp_dir().join(format!("qhm-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("lts.json");
    let text = qhm(&["gen", "--functor", "lts", "--states", "8", "--seed", "3"]).unwrap();
    std::fs::write(&path, &text).unwrap();
    let doc: CoalgebraDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(format::coalgebra_to_doc(&format::coalgebra_from_doc(&doc).unwrap()), doc);
    let v = json(&["check", "adequacy", "--in", path.to_str().unwrap(), "--depth", "3"]);
    assert_eq!(v["passed"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn checks_run_on_fixtures() {
    let e = json(&["check", "expressivity", "--in", &fixture("para.json"), "--schedule", "0,1,2"]);
    assert_eq!(e["monotone"], true);
    let i = json(&["check", "invariance", "--in", &fixture("signed.json")]);
    assert_eq!(i["partition"], "bd_kernel");
    assert_eq!(i["passed"], true);
    let l = json(&["check", "laws", "--quantale", "chain4"]);
    assert_eq!(l["passed"], true);
    let a = json(&["check", "adequacy", "--functor", "dist_maybe", "--states", "3", "--trials", "4", "--depth", "2"]);
    assert_eq!(a["violations"], 0);
}

#[test]
fn validate_reports_each_document_kind() {
    assert_eq!(json(&["validate", "--in", &fixture("signed.json")])["passed"], true);
    let dir = std::env::temp_dir().join(format!("qhm-val-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad_vcat = dir.join("v.json");
    std::fs::write(&bad_vcat, r#"{"quantale": {"kind": "luk01"}, "states": ["x", "y", "z"],
        "matrix": [["0", "1/4", "1"], ["1/4", "0", "1/4"], ["1", "1/4", "0"]]}"#)
    .unwrap();
    let v = json(&["validate", "--in", bad_vcat.to_str().unwrap()]);
    assert_eq!(v["transitive"], false);
    let bad_table = dir.join("q.json");
    std::fs::write(&bad_table, r#"{"kind": "table", "table": {"elements": ["lo", "hi"],
        "join": [["lo", "hi"], ["hi", "hi"]], "tensor": [["lo", "lo"], ["hi", "hi"]]}}"#)
    .unwrap();
    let v = json(&["validate", "--in", bad_table.to_str().unwrap()]);
    assert_eq!(v["passed"], false);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| !c["failure"].is_null()));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn numbers_accept_exponents() {
    assert_eq!(parse_number("1e-9").unwrap(), rational::rat(1, 1_000_000_000));
    assert_eq!(parse_number("2.5e1").unwrap(), rational::rat(25, 1));
    assert_eq!(parse_number("3/8").unwrap(), rational::rat(3, 8));
    assert!(parse_number("1e").is_err());
}

#[test]
fn bad_settings_are_rejected() {
    let f = fixture("small_lts.json");
    assert!(qhm(&["bd", "--in", &f, "--grid", "2/7"]).is_err());
    assert!(qhm(&["bd", "--in", &f, "--eps", "0"]).is_err());
    assert!(qhm(&["bd", "--in", &f, "--backend", "magic"]).is_err());
}

#[test]
fn errors_exit_nonzero_with_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_qhm")).args(["bd", "--in", "/definitely/missing.json"]).output().unwrap();
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
    assert!(out.stdout.is_empty());
}

#[test]
fn instance_size_cap_applies() {
    let out = Command::new(env!("CARGO_BIN_EXE_qhm"))
        .args(["bd", "--in", &fixture("split_eps_0.1.json")])
        .env("QHM_MAX_STATES", "4")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "invalid");
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qhm-out-{}.json", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_qhm"))
        .args(["bd", "--in", &fixture("para.json"), "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["states"][0], "u");
    std::fs::remove_file(path).unwrap();
}
