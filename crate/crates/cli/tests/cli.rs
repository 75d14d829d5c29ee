//! End-to-end tests of the command-line surface: flags, file formats,
//! exit codes, reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn passage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_passage"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn zoo_list_has_one_row_per_variant() {
    let out = passage(&["zoo-list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(rows.len(), 10, "one row per zoo variant:\n{text}");
    let positive_part = rows.iter().find(|r| r.starts_with("positivepartbm")).unwrap();
    assert!(positive_part.contains("markov=false"));
    let sharp = rows.iter().find(|r| r.starts_with("sharpindicator")).unwrap();
    assert!(sharp.contains("sharpness-witness"));
}

#[test]
fn estimate_writes_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = passage(&[
        "estimate",
        "--process",
        "ramp(slope=2)",
        "--grid",
        "uniform:1:5",
        "--paths",
        "10",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "estimate.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,a_hat,a_se,kappa_hat,kappa_se,eta_hat,eta_se");
    assert_eq!(csv.lines().count(), 6, "header plus one row per grid point");
    // deterministic ramp: a_hat = 2t with zero SE
    assert_eq!(lines.next().unwrap(), "0,0,0,0,0,0,0");
    assert_eq!(lines.next().unwrap(), "0.25,0.5,0,0.5,0,0.5,0");
}

#[test]
fn hit_writes_crossing_csv_with_censoring_markers() {
    let dir = tempfile::tempdir().unwrap();
    let out = passage(&[
        "hit",
        "--process",
        "ramp(slope=1)",
        "--grid",
        "uniform:1:5",
        "--r",
        "0.5",
        "--r",
        "3",
        "--paths",
        "4",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "hits.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,path_index,tau,censored");
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert_eq!(lines[1], "0.5,0,0.5,false");
    // the ramp never reaches 3 before t_max = 1
    assert_eq!(lines[5], "3,0,,true");
}

#[test]
fn bounds_emits_manifest_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = passage(&[
        "bounds",
        "--process",
        "ramp(slope=1)",
        "--grid",
        "uniform:4:41",
        "--r",
        "1",
        "--paths",
        "16",
        "--seed",
        "5",
        "--checks",
        "lower-envelope,upper-hitting",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["config"]["process"], "ramp(slope=1)");
    let reports = manifest["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["verdict"], "pass");
        assert!(r["provenance"]["envelope_seed"].is_u64());
    }
    let md = read(dir.path(), "summary.md");
    assert!(md.contains("| lower_envelope_at_crossing |"));
    assert!(md.contains("| upper_hitting |"));
}

#[test]
fn config_errors_exit_three() {
    for args in [
        vec!["bounds", "--process", "unknown", "--grid", "uniform:1:5", "--out", "/tmp/p3"],
        vec!["bounds", "--process", "absbm", "--grid", "nope", "--out", "/tmp/p3"],
        vec!["bounds", "--process", "absbm", "--grid", "uniform:1:5", "--checks", "bogus", "--out", "/tmp/p3"],
        vec!["bounds", "--process", "absbm", "--grid", "uniform:1:5", "--paths", "1", "--out", "/tmp/p3"],
        vec!["--definitely-not-a-flag"],
    ] {
        let out = passage(&args);
        assert_eq!(out.status.code(), Some(3), "args {args:?}: {out:?}");
    }
}

#[test]
fn help_exits_zero_and_documents_the_grammar() {
    let out = passage(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("besselmax3d(d=10)"));
    assert!(text.contains("geom:T_MIN:T_MAX:N"));
    assert!(text.contains("EXIT CODES"));
}

#[test]
fn table1_writes_one_row_per_sphere_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = passage(&[
        "table1",
        "--d",
        "1,2,5",
        "--reps",
        "2000",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = read(dir.path(), "table1.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,mean_sqrt_max_chi2_3,se");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
    assert!(lines[3].starts_with("5,"));
}

#[test]
fn report_bundle_is_reproducible_and_complete() {
    let run = |dir: &Path, workers: &str| {
        let out = passage(&[
            "report",
            "--process",
            "absbm",
            "--grid",
            "uniform:10:501",
            "--r",
            "1",
            "--paths",
            "400",
            "--seed",
            "11",
            "--workers",
            workers,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path(), "1");
    run(b.path(), "2");
    for name in ["manifest.json", "summary.md", "estimate.csv", "hits.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} differs across workers");
    }
}
