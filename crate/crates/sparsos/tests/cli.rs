//! End-to-end tests of the command-line interface: output formats re-parse
//! and the exit-code contract holds (0 success, 1 infeasibility, 2 usage).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use sparsos::abelian::{make_group, FourierFunction};
use sparsos::covers::ChordalCover;
use sparsos::moments::{parse_sdpa, LiftDescription};

fn sparsos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsos"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// 1 − cos(2πx/n): nonnegative with support {0, ±1}.
fn cosine_gap_json(n: u64) -> String {
    let group = make_group(&[n]).unwrap();
    let coeffs = BTreeMap::from([
        (group.element(&[0]).unwrap(), Complex64::new(1.0, 0.0)),
        (group.element(&[1]).unwrap(), Complex64::new(-0.5, 0.0)),
        (group.element(&[-1]).unwrap(), Complex64::new(-0.5, 0.0)),
    ]);
    FourierFunction::new(group, coeffs).unwrap().to_json()
}

#[test]
fn cover_cycle_emits_valid_json() {
    let out = sparsos(&["cover", "cycle", "--n", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cover = ChordalCover::from_json(&stdout(&out)).unwrap();
    assert_eq!(cover.fourier_support().len(), 5);
    assert!(stderr(&out).contains("{-2, -1, 0, 1, 2}"));
}

#[test]
fn cover_cycle_rejects_nondivisor_with_suggestion() {
    let out = sparsos(&["cover", "cycle", "--n", "12", "--d", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("6"));
}

#[test]
fn cover_generic_round_trips() {
    let support = tmp("support_z6.json");
    std::fs::write(&support, "[[1],[-1]]").unwrap();
    let out = sparsos(&[
        "cover",
        "generic",
        "--group",
        "Z6",
        "--support",
        support.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cover = ChordalCover::from_json(&stdout(&out)).unwrap();
    assert!(cover.fourier_support().len() <= 6);
}

#[test]
fn certify_then_verify_round_trip() {
    let f_path = tmp("hexagon_fn.json");
    std::fs::write(&f_path, cosine_gap_json(6)).unwrap();
    let cert_path = tmp("hexagon_cert.json");
    let out = sparsos(&[
        "certify",
        "--function",
        f_path.to_str().unwrap(),
        "--auto",
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = sparsos(&[
        "verify",
        "--function",
        f_path.to_str().unwrap(),
        "--certificate",
        cert_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("PASS"));

    // Tampering with a coefficient must flip the verdict to exit code 1.
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    let re = doc["terms"][0]["coefficients"][0]["re"].as_f64().unwrap();
    doc["terms"][0]["coefficients"][0]["re"] = serde_json::json!(re + 0.1);
    let bad_path = tmp("hexagon_cert_bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = sparsos(&[
        "verify",
        "--function",
        f_path.to_str().unwrap(),
        "--certificate",
        bad_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FAIL"));
}

#[test]
fn verify_rejects_wrong_group_as_usage_error() {
    let f6 = tmp("fn_z6.json");
    std::fs::write(&f6, cosine_gap_json(6)).unwrap();
    let f8 = tmp("fn_z8.json");
    std::fs::write(&f8, cosine_gap_json(8)).unwrap();
    let cert8 = tmp("cert_z8.json");
    let out = sparsos(&[
        "certify",
        "--function",
        f8.to_str().unwrap(),
        "--auto",
        "--out",
        cert8.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = sparsos(&[
        "verify",
        "--function",
        f6.to_str().unwrap(),
        "--certificate",
        cert8.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_rejects_negative_function() {
    let group = make_group(&[6]).unwrap();
    let coeffs = BTreeMap::from([
        (group.element(&[0]).unwrap(), Complex64::new(-0.5, 0.0)),
        (group.element(&[1]).unwrap(), Complex64::new(-0.5, 0.0)),
        (group.element(&[-1]).unwrap(), Complex64::new(-0.5, 0.0)),
    ]);
    let f = FourierFunction::new(group, coeffs).unwrap();
    let path = tmp("negative_fn.json");
    std::fs::write(&path, f.to_json()).unwrap();
    let out = sparsos(&["certify", "--function", path.to_str().unwrap(), "--auto"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lift_tc_reports_size_and_reparses() {
    let out = sparsos(&["lift", "--polytope", "tc", "--N", "16", "--d", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("size 10"));
    let lift = LiftDescription::from_json(&stdout(&out)).unwrap();
    assert_eq!(lift.size(), 10);
}

#[test]
fn lift_cut_four_has_size_seven() {
    let out = sparsos(&["lift", "--polytope", "cut", "--n", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("size 7"));
    let lift = LiftDescription::from_json(&stdout(&out)).unwrap();
    assert_eq!(lift.size(), 7);
}

#[test]
fn lift_hexagon_real_sdpa_export() {
    let out = sparsos(&[
        "lift", "--polytope", "tc", "--N", "6", "--d", "1", "--real", "--format", "sdpa",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("size 4"));
    let p = parse_sdpa(&stdout(&out)).unwrap();
    assert_eq!(p.m, 5);
    assert_eq!(p.block_sizes, vec![4]);
}

#[test]
fn bench_table_runs() {
    let out = sparsos(&["bench", "sizes", "--max-d", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.contains("skipped"));
    assert!(table.lines().count() >= 5);
}

#[test]
fn usage_errors_exit_two() {
    let out = sparsos(&["cover", "cycle", "--frequency", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sparsos(&["lift", "--polytope", "tc"]);
    assert_eq!(out.status.code(), Some(2));
}
