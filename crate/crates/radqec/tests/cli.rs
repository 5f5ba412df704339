//! Command-line behaviour: artifacts, determinism and error exits.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use radqec::report::sha256_hex;
use serde_json::Value;

const SMALL: &str = r#"
samples = 6
decoders = ["mwpm", "radmatching"]

[code]
distances = [5]

[[radiation]]
locus = "central"

[time]
horizon = 0.1e-3
stride = 4
"#;

fn radqec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radqec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn run_small(dir: &Path, out: &str, threads: &str) -> Output {
    fs::write(dir.join("small.toml"), SMALL).unwrap();
    radqec(
        &["decoder-compare", "--config", "small.toml", "--seed", "11", "--out", out, "--threads", threads],
        dir,
    )
}

#[test]
fn repeated_runs_write_identical_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_small(tmp.path(), "a", "1");
    let b = run_small(tmp.path(), "b", "3");
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    for name in ["decoder-compare.csv", "decoder-compare_detections.csv", "decoder-compare.svg"] {
        let x = fs::read(tmp.path().join("a").join(name)).unwrap();
        let y = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn manifest_lists_every_artifact_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_small(tmp.path(), "res", "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.trim_end().ends_with("manifest.json"));
    let dir = tmp.path().join("res");
    let manifest: Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"], "decoder-compare");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["config"]["samples"], 6);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 4);
    for a in artifacts {
        let bytes = fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn metrics_csv_has_one_row_per_decoded_shot() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_small(tmp.path(), "res", "1").status.success());
    let csv = fs::read_to_string(tmp.path().join("res/decoder-compare.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"logical_error_mwpm"));
    assert!(header.contains(&"logical_error_radmatching"));
    let shot = header.iter().position(|h| *h == "shot").unwrap();
    let shots: Vec<usize> = lines.map(|r| r.split(',').nth(shot).unwrap().parse().unwrap()).collect();
    assert!(!shots.is_empty());
    assert!(shots.iter().enumerate().all(|(i, &s)| s == 4 * i));
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("small.toml"), SMALL).unwrap();
    let out = radqec(&["decoder-compare", "--config", "small.toml", "--out", "res"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    assert!(!tmp.path().join("res/manifest.json").exists());
}

#[test]
fn unknown_decoder_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "seed = 1\ndecoders = [\"belief\"]\n").unwrap();
    let out = radqec(&["decoder-compare", "--config", "bad.toml", "--out", "res"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("belief"));
}

#[test]
fn unknown_config_key_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "seed = 1\n[code]\ndistance = 5\n").unwrap();
    let out = radqec(&["distance-sweep", "--config", "bad.toml", "--out", "res"], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn even_distance_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "seed = 1\n[code]\ndistances = [4]\n").unwrap();
    let out = radqec(&["distance-sweep", "--config", "bad.toml", "--out", "res"], tmp.path());
    assert!(!out.status.success());
}
