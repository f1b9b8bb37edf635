//! End-to-end runs of the command-line binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use situated_lab::io::{parse_run_csv, parse_types_csv, RUN_HEADER, SUMMARY_HEADER, TYPES_HEADER};
use situated_lab::product::Landscape;
use situated_lab::report::{INSUFFICIENT, REPORT_HEADER};
use tempfile::tempdir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_situated-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn gen_types_is_deterministic() {
    let dir = tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let summary = ok(&["gen-types", "--seed", "7", "--count", "10", "--out", p(&a)]);
    assert!(summary.starts_with("types 10: 45 pairs"), "{summary}");
    ok(&["gen-types", "--seed", "7", "--count", "10", "--out", p(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some(TYPES_HEADER));
    let types = parse_types_csv("a", &text).unwrap();
    assert_eq!(types.len(), 10);
    for (i, t) in types.iter().enumerate() {
        for u in &types[i + 1..] {
            assert!(t.signature.distance(&u.signature) >= 0.5);
        }
    }
}

#[test]
fn gen_types_single_and_infeasible() {
    let dir = tempdir().unwrap();
    let one = dir.path().join("one.csv");
    ok(&["gen-types", "--seed", "3", "--count", "1", "--out", p(&one)]);
    assert_eq!(std::fs::read_to_string(&one).unwrap().lines().count(), 2);

    let bad = dir.path().join("bad.csv");
    let out = lab(&[
        "gen-types", "--seed", "3", "--count", "10", "--min-dist", "999", "--set", "type_attempts=200", "--out", p(&bad),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("achieved 1 of 10") && err.contains("min distance 999"), "{err}");
    assert!(!bad.exists());
}

#[test]
fn landscape_summary_matches_reread_file() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("land.csv");
    let stdout = ok(&["landscape", "--seed", "11", "--samples", "150", "--out", p(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let summary = text.lines().last().unwrap();
    assert!(summary.starts_with("# fdc,"));
    assert_eq!(stdout.trim(), summary.trim_start_matches("# "));

    let records = parse_types_csv("land", &text).unwrap();
    assert_eq!(records.len(), 150);
    let reread = Landscape::analyze(&records, None).unwrap().fdc().unwrap();
    let printed: f64 = summary.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(reread, printed);

    ok(&["landscape", "--seed", "11", "--samples", "2", "--out", p(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(parse_types_csv("land", &text).unwrap().len(), 2);
    assert!(lab(&["landscape", "--seed", "1", "--samples", "1", "--out", p(&out)]).status.code() != Some(0));
}

#[test]
fn short_run_writes_five_samples() {
    let dir = tempdir().unwrap();
    let (out, dump, net) = (dir.path().join("r.csv"), dir.path().join("w.csv"), dir.path().join("n.csv"));
    let stdout = ok(&[
        "run", "--seed", "5", "--cycles", "100", "--social", "--out", p(&out), "--world-dump", p(&dump),
        "--network-log", p(&net),
    ]);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some(SUMMARY_HEADER));
    assert!(lines.next().unwrap().starts_with("5,true,"));

    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(RUN_HEADER));
    let samples = parse_run_csv("r", &text).unwrap();
    assert_eq!(samples.iter().map(|s| s.cycle).collect::<Vec<_>>(), vec![20, 40, 60, 80, 100]);
    assert!(samples.iter().all(|s| s.consumers.len() == 40));
    // 90 entities per sampling cycle plus the header.
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 1 + 5 * 90);
    assert!(std::fs::read_to_string(&net).unwrap().lines().count() > 5);
}

#[test]
fn run_rejects_invalid_configuration() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let res = lab(&["run", "--seed", "1", "--set", "ws_degree=3", "--set", "sample_every=0", "--out", p(&out)]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("ws_degree") && err.contains("sample_every"), "{err}");
    let res = lab(&["run", "--seed", "1", "--set", "no_such_key=1", "--out", p(&out)]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("no_such_key"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("lab.conf");
    std::fs::write(&cfg, "# short smoke run\ncycles = 200\nsample_every = 40\n").unwrap();
    let out = dir.path().join("r.csv");
    ok(&["run", "--seed", "2", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(parse_run_csv("r", &std::fs::read_to_string(&out).unwrap()).unwrap().len(), 5);
    ok(&["run", "--seed", "2", "--config", p(&cfg), "--set", "sample_every=20", "--out", p(&out)]);
    assert_eq!(parse_run_csv("r", &std::fs::read_to_string(&out).unwrap()).unwrap().len(), 10);
}

#[test]
fn experiment_is_reproducible_and_analyzable() {
    let dir = tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let short = ["--set", "cycles=600"];
    let report = ok(&[&["experiment", "--pairs", "3", "--seed-base", "40", "--out-dir", p(&a)][..], &short].concat());
    ok(&[&["experiment", "--pairs", "3", "--seed-base", "40", "--sequential", "--out-dir", p(&b)][..], &short].concat());
    assert_eq!(dir_contents(&a), dir_contents(&b));

    let files = dir_contents(&a);
    assert_eq!(files.keys().filter(|k| k.starts_with("run_")).count(), 6);
    assert!(files.contains_key("summary.csv") && files.contains_key("config.txt"));
    assert_eq!(report.lines().next(), Some(REPORT_HEADER));
    assert_eq!(report.lines().count(), 6);

    let analyzed = ok(&["analyze", "--in-dir", p(&a), "--out", p(&c)]);
    assert_eq!(analyzed, report);
    for (name, bytes) in dir_contents(&c) {
        assert_eq!(files.get(&name), Some(&bytes), "{name} differs");
    }
}

#[test]
fn single_pair_reports_insufficient_n() {
    let dir = tempdir().unwrap();
    let report = ok(&["experiment", "--pairs", "1", "--seed-base", "9", "--set", "cycles=200", "--out-dir", p(dir.path())]);
    for line in report.lines().skip(1) {
        assert!(line.contains(INSUFFICIENT), "{line}");
    }
}

#[test]
fn analyze_names_missing_inputs() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("out");
    let res = lab(&["analyze", "--in-dir", p(dir.path()), "--out", p(&out)]);
    assert!(!res.status.success());

    ok(&["experiment", "--pairs", "2", "--seed-base", "1", "--set", "cycles=200", "--out-dir", p(dir.path())]);
    std::fs::remove_file(dir.path().join("run_2_nonsocial.csv")).unwrap();
    let res = lab(&["analyze", "--in-dir", p(dir.path()), "--out", p(&out)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("run_2_nonsocial.csv"));
}
