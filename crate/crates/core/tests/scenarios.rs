//! Regression: every bundled scenario reproduces its committed summary
//! byte-for-byte.

use std::path::PathBuf;

use coofdma_core::runner;
use coofdma_core::scenario::Scenario;

fn repo_dir(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn check_scenario(name: &str) {
    let scenario = Scenario::load(&repo_dir("scenarios").join(format!("{name}.toml")))
        .expect("bundled scenario parses");
    let report = runner::run(&scenario).expect("bundled scenario runs");
    let expected_path = repo_dir("scenarios/expected").join(format!("{name}_summary.txt"));
    let expected = std::fs::read_to_string(&expected_path)
        .unwrap_or_else(|e| panic!("missing committed summary {}: {e}", expected_path.display()));
    assert_eq!(
        report.summary, expected,
        "summary drifted from the committed baseline for {name}"
    );
    assert!(report.all_checks_passed(), "{}", report.summary);
}

#[test]
fn fig1_hidden_ap_matches_committed_summary() {
    check_scenario("fig1_hidden_ap");
}

#[test]
fn cfo_loop_matches_committed_summary() {
    check_scenario("cfo_loop");
}

#[test]
fn cfo_drift_matches_committed_summary() {
    check_scenario("cfo_drift");
}

#[test]
fn trigger_rtt_matches_committed_summary() {
    check_scenario("trigger_rtt");
}

#[test]
fn withdrawal_matches_committed_summary() {
    check_scenario("withdrawal");
}

#[test]
fn every_bundled_scenario_has_a_committed_summary() {
    let dir = repo_dir("scenarios");
    let mut missing = Vec::new();
    for entry in std::fs::read_dir(&dir).expect("scenarios dir") {
        let path = entry.expect("dir entry").path();
        if path.extension().is_some_and(|e| e == "toml") {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let expected = dir.join("expected").join(format!("{name}_summary.txt"));
            if !expected.exists() {
                missing.push(name);
            }
        }
    }
    assert!(
        missing.is_empty(),
        "scenarios without committed summaries: {missing:?}"
    );
}
