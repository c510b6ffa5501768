use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rmtlab::pairwise_sum;
use rmtlab::qcore::{Operator, C64};

fn rmtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = rmtlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Every file except the timing report.
fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "report.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn summary(dir: &Path) -> BTreeMap<String, f64> {
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap();
    serde_json::from_value(report["summary"].clone()).unwrap()
}

fn csv_column(path: &Path, column: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn stats_runs_are_deterministic_and_replayable() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    let args = |dir: &Path| {
        vec![
            "stats".to_string(),
            "pseudo:3:2".into(),
            "--samples".into(),
            "5".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            dir.to_string_lossy().into_owned(),
        ]
    };
    let run = |dir: &Path| ok(&args(dir).iter().map(String::as_str).collect::<Vec<_>>());
    run(&a);
    run(&b);
    let files_a = data_files(&a);
    let files_b = data_files(&b);
    assert_eq!(
        files_a.keys().collect::<Vec<_>>(),
        files_b.keys().collect::<Vec<_>>()
    );
    for (name, bytes) in &files_a {
        if name != "manifest.json" {
            assert_eq!(bytes, &files_b[name], "{name} differs between runs");
        }
    }

    // Replaying the manifest into another directory reproduces every file.
    let manifest = a.join("manifest.json");
    ok(&[
        "stats",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    for (name, bytes) in data_files(&c) {
        if name != "manifest.json" {
            assert_eq!(bytes, files_a[&name], "{name} differs on replay");
        }
    }
}

#[test]
fn histograms_integrate_to_one_and_summaries_match_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&[
        "stats",
        "interp:16:0.7",
        "--samples",
        "8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let mut hist_count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if !path.to_string_lossy().ends_with("_hist.csv") {
            continue;
        }
        hist_count += 1;
        let left = csv_column(&path, 0);
        let right = csv_column(&path, 1);
        let density = csv_column(&path, 2);
        let integral: f64 = (0..density.len())
            .map(|k| density[k] * (right[k] - left[k]))
            .sum();
        assert!(
            (integral - 1.0).abs() < 1e-9,
            "{}: {integral}",
            path.display()
        );
    }
    assert_eq!(hist_count, 4);

    let s = summary(dir);
    let q = csv_column(&dir.join("stats_q_values.csv"), 0);
    assert_eq!(s["mean_q"], pairwise_sum(&q) / q.len() as f64);
    let ks = fs::read_to_string(dir.join("stats_ks.csv")).unwrap();
    let header: Vec<&str> = ks.lines().next().unwrap().split(',').collect();
    let values = csv_column(&dir.join("stats_ks.csv"), 0);
    assert_eq!(s[header[0]], values[0]);
    let spacings = csv_column(&dir.join("stats_spacings.csv"), 0);
    assert!((pairwise_sum(&spacings) / spacings.len() as f64 - 1.0).abs() < 1e-12);
}

#[test]
fn generated_operators_feed_fit_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let ops = tmp.path().join("ops");
    let fits = tmp.path().join("fits");
    let reference = tmp.path().join("ref.rmtref");
    ok(&[
        "gen",
        "cue-hurwitz:16",
        "--samples",
        "3",
        "--format",
        "binary",
        "--out",
        ops.to_str().unwrap(),
    ]);
    let inputs: Vec<String> = (0..3)
        .map(|k| {
            ops.join(format!("operator_{k:04}.bin"))
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    let mut args = vec!["fit-delta", "--out", fits.to_str().unwrap()];
    args.extend([
        "--reference",
        reference.to_str().unwrap(),
        "--samples-per-delta",
        "2",
        "--input",
    ]);
    args.extend(inputs.iter().map(String::as_str));
    ok(&args);
    assert!(reference.exists());
    let records: serde_json::Value =
        serde_json::from_slice(&fs::read(fits.join("fits.json")).unwrap()).unwrap();
    let targets: Vec<&str> = records
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["target"].as_str().unwrap())
        .collect();
    assert_eq!(targets, ["elements", "eigenvectors", "spacings"]);
    for r in records.as_array().unwrap() {
        assert!((0.0..=1.0).contains(&r["best_delta"].as_f64().unwrap()));
    }
}

#[test]
fn fig3_short_run_writes_every_series() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&["fig3", "--t-max", "2", "--out", dir.to_str().unwrap()]);
    for name in [
        "sawtooth_k1.5",
        "sawtooth_k-1.5",
        "harper_g1",
        "harper_g0.1",
        "baker",
    ] {
        let q = csv_column(&dir.join(format!("fig3_q_{name}.csv")), 1);
        assert_eq!(q.len(), 2, "{name}");
        assert!(q.iter().all(|v| (0.0..=1.0).contains(v)));
    }
    let s = summary(dir);
    assert!((s["sawtooth_k1.5_q1"] - 1.0).abs() < 1e-10);
    assert!(dir.join("fig3_inset_baker_t1_element_hist.csv").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();

    let bad_spec = rmtlab(&["stats", "interp:16:1.5", "--out", out]);
    assert_eq!(bad_spec.status.code(), Some(1));
    let no_spec = rmtlab(&["stats", "--out", out]);
    assert_eq!(no_spec.status.code(), Some(1));

    // A non-unitary input fails inside the eigendecomposition contract.
    let mut entries = vec![C64::new(0.0, 0.0); 4];
    entries[0] = C64::new(2.0, 0.0);
    entries[3] = C64::new(1.0, 0.0);
    let path = tmp.path().join("bad.json");
    fs::write(
        &path,
        Operator::from_entries(2, entries)
            .unwrap()
            .to_json()
            .unwrap(),
    )
    .unwrap();
    let numerical = rmtlab(&["stats", "--input", path.to_str().unwrap(), "--out", out]);
    assert_eq!(
        numerical.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&numerical.stderr)
    );
}
