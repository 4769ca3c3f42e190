use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn sgn_sim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgn-sim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_small_table_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = sgn_sim(&["table1", "--reps", "1", "--n", "100", "--seed", "7"], dir);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(dir_contents(&a), dir_contents(&b));
}

#[test]
fn missing_config_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sgn_sim(&["custom", "--config", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn usage_errors_and_help() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        sgn_sim(&["table1", "--bogus"], tmp.path()).status.code(),
        Some(1)
    );
    assert_eq!(
        sgn_sim(&["table1", "--format", "xml"], tmp.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(sgn_sim(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(
        sgn_sim(&["table1", "--n", "0"], tmp.path()).status.code(),
        Some(1)
    );
}

#[test]
fn unwritable_output_directory_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = sgn_sim(
        &["table1", "--reps", "1", "--n", "10"],
        &blocker.join("sub"),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_step_smoke_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sgn_sim(&["table2", "--reps", "1", "--n", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(tmp.path().join("table2_mse.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    // 20 grid cells, each with the average and the raw iterate.
    assert_eq!(rows.len(), 40);
    assert!(rows
        .iter()
        .all(|r| &r[5] == "1" && r[6].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sgn_sim(
        &[
            "curves", "--r0", "5", "--reps", "3", "--n", "2000", "--seed", "4",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let manifest: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["command"]["subcommand"], "curves");
    let listed: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap())
        .collect();
    let mut on_disk: Vec<String> = dir_contents(tmp.path()).into_iter().map(|f| f.0).collect();
    on_disk.retain(|f| f != "manifest.json");
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, on_disk);
    for f in manifest["files"].as_array().unwrap() {
        let bytes = fs::read(tmp.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            f["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
    assert!(listed.contains(&"curves_r5_curves.csv"));
    let checkpoints = &manifest["command"]["configs"][0]["checkpoints"];
    assert_eq!(checkpoints.as_array().unwrap().first().unwrap(), 100);
}

#[test]
fn normality_report_has_both_pivots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sgn_sim(
        &[
            "normality",
            "--reps",
            "1000",
            "--n",
            "5000",
            "--seed",
            "1",
            "--format",
            "json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_slice(&fs::read(tmp.path().join("normality.json")).unwrap()).unwrap();
    let pivots = report["pivots"].as_array().unwrap();
    let stats: Vec<&str> = pivots
        .iter()
        .map(|p| p["statistic"].as_str().unwrap())
        .collect();
    assert_eq!(stats, ["C_n", "C_bar_n"]);
    for p in pivots {
        assert_eq!(p["sample"]["values"].as_array().unwrap().len(), 1000);
        assert!(p["ks"].as_f64().unwrap() <= 0.0516);
    }
    assert!(report.get("elapsed_secs").is_none());
}

#[test]
fn breakdowns_above_threshold_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"name": "bad", "algorithms": ["SGD"], "grid": [{"c_alpha": 1e6, "alpha": 0.66}],
            "n": 200, "replications": 4, "init_radius": 1.0, "projection": false}"#,
    )
    .unwrap();
    let out = sgn_sim(
        &["custom", "--config", cfg.to_str().unwrap()],
        &tmp.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(2));
    let text = fs::read_to_string(tmp.path().join("out/bad.txt")).unwrap();
    assert!(text.contains("flagged"));
}
