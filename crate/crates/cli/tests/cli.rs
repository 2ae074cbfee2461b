use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn dbar(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar"))
        .args(args)
        .current_dir(cwd)
        .env("DBAR_THREADS", "1")
        .output()
        .expect("spawn dbar")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn unit_grid(res: usize) -> Value {
    json!({ "domain": { "kind": "disc", "center": [0.0, 0.0], "radius": 1.0 }, "resolution": res })
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn builtin_disc_potential_passes() {
    let tmp = TempDir::new().unwrap();
    let o = dbar(&["transform", "--builtin", "disc-potential", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("d/report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report["result"]["max_error"].as_f64().unwrap() <= 0.01);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "smooth.json",
        &json!({
            "scenario": "smooth-cauchy",
            "seed": 7,
            "grid": unit_grid(48),
            "pgm": true,
            "op": { "op": "cauchy", "input": { "kind": "smooth" } }
        }),
    );
    let cfg = cfg.to_str().unwrap();
    for out in ["a", "b"] {
        let o = dbar(&["transform", "--config", cfg, "--out", out], tmp.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = read_dir_bytes(&tmp.path().join("a"));
    let b = read_dir_bytes(&tmp.path().join("b"));
    assert!(a.iter().any(|(n, _)| n.ends_with(".pgm")));
    assert_eq!(a, b);
}

#[test]
fn empty_and_malformed_configs_are_errors() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.json"), "").unwrap();
    let o = dbar(&["transform", "--config", "empty.json"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("empty.json"), "{}", stderr(&o));

    let bad = write_config(tmp.path(), "typo.json", &json!({ "scenario": "x", "op": { "op": "cauchy", "inptu": {} } }));
    let o = dbar(&["transform", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let o = dbar(&["transform"], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn op_must_match_subcommand() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ce.json",
        &json!({ "scenario": "ce", "op": { "op": "counterexample", "k": 5 } }),
    );
    let o = dbar(&["transform", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("counterexample"), "{}", stderr(&o));
}

#[test]
fn missing_input_file_is_reported() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "missing.json",
        &json!({
            "scenario": "missing",
            "grid": unit_grid(32),
            "op": { "op": "dbar", "input": { "kind": "file", "path": "nowhere.dbf" } }
        }),
    );
    let o = dbar(&["transform", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nowhere.dbf"), "{}", stderr(&o));
}

#[test]
fn counterexample_norms_grow() {
    let tmp = TempDir::new().unwrap();
    let o = dbar(&["counterexample", "--K", "50", "--p", "3", "--out", "ce"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("ce/norms.csv")).unwrap();
    let norms: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(norms.len() >= 3);
    assert!(norms.windows(2).all(|w| w[1] >= w[0]), "{norms:?}");

    let o = dbar(&["counterexample", "--K", "5", "--p", "5"], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn field_files_round_trip_and_bad_files_fail() {
    let tmp = TempDir::new().unwrap();
    let o = dbar(&["transform", "--builtin", "disc-potential", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = write_config(
        tmp.path(),
        "rt.json",
        &json!({ "scenario": "rt", "op": { "op": "field-roundtrip", "path": "d/potential.dbf" } }),
    );
    let o = dbar(&["verify", "--config", cfg.to_str().unwrap(), "--out", "rt"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let bytes = fs::read(tmp.path().join("d/potential.dbf")).unwrap();
    let side = tmp.path().join("d/potential.dbf.json");

    fs::write(tmp.path().join("cut.dbf"), &bytes[..bytes.len() / 2]).unwrap();
    fs::copy(&side, tmp.path().join("cut.dbf.json")).unwrap();
    let cfg = write_config(
        tmp.path(),
        "cut.json",
        &json!({ "scenario": "cut", "op": { "op": "field-roundtrip", "path": "cut.dbf" } }),
    );
    let o = dbar(&["verify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);

    let mut v2 = bytes.clone();
    v2[4..8].copy_from_slice(&2u32.to_le_bytes());
    fs::write(tmp.path().join("v2.dbf"), &v2).unwrap();
    fs::copy(&side, tmp.path().join("v2.dbf.json")).unwrap();
    let cfg = write_config(
        tmp.path(),
        "v2.json",
        &json!({ "scenario": "v2", "op": { "op": "field-roundtrip", "path": "v2.dbf" } }),
    );
    let o = dbar(&["verify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).to_lowercase().contains("version"), "{}", stderr(&o));
}

#[test]
fn pipeline_verdict_sets_exit_code() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str, powers: [u32; 2]| {
        let cfg = write_config(
            tmp.path(),
            &format!("{name}.json"),
            &json!({
                "scenario": name,
                "grid": unit_grid(64),
                "op": {
                    "op": "pipeline",
                    "u": { "kind": "polynomial", "terms": [{ "c": [1.0, 0.0], "powers": powers }] },
                    "e": { "points": [[0.0, 0.0]] },
                    "structure": { "n": 1, "model": { "kind": "zero" } }
                }
            }),
        );
        dbar(&["removability", "--config", cfg.to_str().unwrap()], tmp.path())
    };
    let o = run("square", [2, 0]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run("conjugate", [0, 1]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let report: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/conjugate/report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["result"]["verdict"], "not-removable");
}

#[test]
fn help_exits_cleanly() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&dbar(&["--help"], tmp.path())), 0);
    assert_eq!(code(&dbar(&["bogus"], tmp.path())), 1);
}
