use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinframe")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["manifest"]["config_digest"].as_str().unwrap().len() == 64);
    doc["report"].clone()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thinframe-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn torus_distance() {
    let r = report(&["torus", "dist", "--tau1", "i", "--tau2", "2i"]);
    assert!((r["distance"].as_f64().unwrap() - 0.346574).abs() < 1e-6);
    let r = report(&["torus", "dist", "--tau1", "i", "--tau2", "2i", "--bound", "10"]);
    assert!((r["kerckhoff_distance"].as_f64().unwrap() - 0.5 * 2f64.ln()).abs() < 1e-12);
    assert_eq!(r["argmax_pq"]["p"], 1);
}

#[test]
fn triangle_suites() {
    let tripod = report(&["triangles", "--space", "tripod", "--samples", "10000", "--bound", "linear"]);
    assert_eq!(tripod["violations"].as_array().unwrap().len(), 0);
    assert_eq!(tripod["samples"], 10000);
    let plane = report(&["triangles", "--space", "euclidean", "--bound", "sqrt2t"]);
    assert_eq!(plane["violations"].as_array().unwrap().len(), 0);
    let sphere = report(&["triangles", "--space", "sphere", "--family", "theta"]);
    assert!(!sphere["violations"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["triangles", "--space", "moon"]).status.code(), Some(2));
    assert_eq!(run(&["triangles", "--space", "tripod", "--bound", "cubic"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn surface_reports() {
    let r = report(&["surface", "square-torus", "--saddles", "--length", "10"]);
    let mut brute = 0;
    for p in -10i64..=10 {
        for q in -10i64..=10 {
            if num_gcd(p, q) == 1 && p * p + q * q <= 100 {
                brute += 1;
            }
        }
    }
    assert_eq!(r["saddle_count"], brute);
    let r = report(&["surface", "square-torus", "--intersect", "(1,2)", "(3,4)"]);
    assert_eq!(r["intersection"]["count"], 2);
    let r = report(&["surface", "golden-torus", "--decompose"]);
    assert_eq!(r["decomposition"]["minimal_components"].as_array().unwrap().len(), 1);
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}

#[test]
fn malformed_surface_exits_1() {
    let dir = scratch("bad-surface");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"polygons": [[[0,0],[1,0],[1,1],[0,1]]], "gluings": [[0,0,0,2,"translation"]], "marked": []}"#)
        .unwrap();
    let out = run(&["surface", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gluing incomplete"));
}

#[test]
fn iet_certificates() {
    let r = report(&["iet", "tall", "--lengths", "golden", "--H", "10"]);
    assert!(r["certificate"]["verified_min_height"].as_f64().unwrap() >= 10.0);
    assert_eq!(r["verified"], true);
    let out = run(&["iet", "tall", "--lengths", "1/3,2/3", "--perm", "2,1", "--H", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&["iet", "keane", "--lengths", "1/2,1/2", "--perm", "2,1"]);
    assert_eq!(r["keane"]["result"], "periodic");
}

#[test]
fn walk_is_deterministic_across_thread_counts() {
    let dir = scratch("walk");
    let cfg = dir.join("walk.json");
    std::fs::write(
        &cfg,
        r#"{"generators": [[1,1,0,1],[1,-1,0,1],[0,-1,1,0]], "probs": [0.25,0.25,0.5],
            "basepoint": {"re": 0.0, "im": 1.0}, "epsilon": 0.5, "steps": 1500, "paths": 6, "seed": 3}"#,
    )
    .unwrap();
    let (o1, o2) = (dir.join("one"), dir.join("four"));
    let a = run(&["walk", "run", "--config", cfg.to_str().unwrap(), "--out", o1.to_str().unwrap(), "--threads", "1"]);
    let b = run(&["walk", "run", "--config", cfg.to_str().unwrap(), "--out", o2.to_str().unwrap(), "--threads", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    for name in ["report.json", "path_00000.csv", "path_00005.csv"] {
        assert_eq!(std::fs::read(o1.join(name)).unwrap(), std::fs::read(o2.join(name)).unwrap(), "{name}");
    }
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(doc["report"]["A_hat"].as_f64().unwrap() > 0.0);
    assert!(!doc["report"]["tracking_medians"].as_array().unwrap().is_empty());
    assert_eq!(doc["manifest"]["outputs"].as_array().unwrap().len(), 7);
    let csv = std::fs::read_to_string(o1.join("path_00000.csv")).unwrap();
    assert!(csv.starts_with("n,a_n,s_n,chi_K,record_flag\n"));
    assert_eq!(csv.lines().count(), 1502);
    let seeded = run(&["walk", "run", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_ne!(seeded.stdout, a.stdout);
}

#[test]
fn bad_walk_config_exits_1() {
    let dir = scratch("bad-walk");
    let cfg = dir.join("walk.json");
    std::fs::write(
        &cfg,
        r#"{"generators": [[1,1,0,1]], "probs": [0.5], "basepoint": {"re": 0.0, "im": 1.0},
            "epsilon": 0.5, "steps": 10, "paths": 2, "seed": 0}"#,
    )
    .unwrap();
    assert_eq!(run(&["walk", "run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}
