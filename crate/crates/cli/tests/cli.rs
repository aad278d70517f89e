use std::fs;
use std::process::{Command, Output};

use harmbounds::bounds::{EvidenceSet, Interval};
use harmbounds::propositions::{BoundsProvider, SharpBounds};
use harmbounds::Exact;
use harmbounds_cli::input::{parse_input, InputFormat, CSV_HEADER};
use harmbounds_cli::report::{analyze, render_json, AnalysisReport};
use harmbounds_cli::verify::{command_verify_with, VerifyReport};
use harmbounds_cli::OutputFormat;

const GOLDEN: &str = include_str!("golden/example.txt");

fn harmbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmbounds"))
        .args(args)
        .env("HARMBOUNDS_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn example_matches_golden_text() {
    let first = harmbounds(&["example"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), GOLDEN);
    let second = harmbounds(&["example"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn example_json_carries_exact_rationals() {
    let out = harmbounds(&["example", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout(&out);
    for r in ["\"21/100\"", "\"-7/25\"", "\"-7/10\"", "\"7/10\""] {
        assert!(json.contains(r), "missing {r}");
    }
    let report: AnalysisReport = serde_json::from_str(&json).unwrap();
    let fused = report.strata[0].fused.as_ref().unwrap();
    assert_eq!(fused.harm.lower.rational.to_fraction(), "21/100");
    assert_eq!(fused.cate.astar0.as_ref().unwrap().lower.rational.to_fraction(), "7/10");
}

#[test]
fn unknown_color_setting_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_harmbounds"))
        .arg("example")
        .env("HARMBOUNDS_COLOR", "sometimes")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_analyze_serialize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.json");
    fs::write(&path, harmbounds_cli::MP_MEN_JSON).unwrap();
    let input = parse_input(&path, InputFormat::Json).unwrap();
    let report = analyze(&input).unwrap();
    let back: AnalysisReport = serde_json::from_str(&render_json(&report)).unwrap();
    assert_eq!(back, report);

    // The input itself survives a round trip too.
    let text = serde_json::to_string(&input).unwrap();
    assert_eq!(serde_json::from_str::<harmbounds_cli::input::StudyInput>(&text).unwrap(), input);
}

fn write_csv(rows: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.csv");
    let mut body = CSV_HEADER.join(",");
    for row in rows {
        body.push('\n');
        body.push_str(row);
    }
    body.push('\n');
    fs::write(&path, body).unwrap();
    (dir, path)
}

#[test]
fn csv_input_matches_json_input() {
    let (_dir, path) = write_csv(&["sex=men,51,100,79,100,21,70,9,30"]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let from_csv: AnalysisReport = serde_json::from_str(&stdout(&out)).unwrap();
    let mut expected = harmbounds_cli::command_example();
    expected.note = None;
    assert_eq!(from_csv, expected);
}

#[test]
fn events_above_total_exit_one_naming_the_cell() {
    let (_dir, path) = write_csv(&["sex=men,51,100,79,100,21,70,31,30"]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("observational.untreated"), "{err}");
}

#[test]
fn malformed_csv_reports_line() {
    let (_dir, path) = write_csv(&["sex=men,51,100,79,100", "sex=women,1,2,3,4,,,,"]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn experimental_only_stratum_has_no_fused_column() {
    let (_dir, path) = write_csv(&["site=a,6,10,2,10,,,,"]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("P1: not available"));
    assert!(text.contains("Counterfactual   Yes       -"), "{text}");
    assert!(text.contains("Interventionist  Yes       -"), "{text}");
}

#[test]
fn incompatible_strata_are_flagged() {
    let (_dir, path) = write_csv(&[
        "site=a,10,100,50,100,81,90,5,10",
        "site=b,51,100,79,100,21,70,9,30",
    ]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: AnalysisReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.strata[0].is_incompatible());
    assert!(report.strata[1].fused.is_some());

    let (_dir, path) = write_csv(&["site=a,10,100,50,100,81,90,5,10"]);
    let out = harmbounds(&["analyze", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("INCOMPATIBLE"));
}

#[test]
fn verify_small_run_passes_and_rejects_zero_samples() {
    let out = harmbounds(&["verify", "--samples", "50", "--seed", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.holds());
    assert_eq!(report.propositions.len(), 4);

    let out = harmbounds(&["verify", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

/// Ignores the observational data when bounding marginal harm.
struct StaleHarm;

impl BoundsProvider<Exact> for StaleHarm {
    fn harm(&self, evidence: &EvidenceSet<Exact>) -> harmbounds::Result<Interval<Exact>> {
        harmbounds::bounds::harm_bounds(&evidence.without_observational())
    }
}

#[test]
fn buggy_bounds_yield_reverifiable_counterexamples() {
    let report = command_verify_with(&StaleHarm, 30, 5).unwrap();
    assert_eq!(report.exit_code(), 3);
    assert!(!report.holds());

    // Counterexamples survive serialization and still fail, but only under
    // the buggy provider.
    let json = report.render(OutputFormat::Json);
    let back: VerifyReport = serde_json::from_str(&json).unwrap();
    for record in &back.counterexamples {
        let joint = record.to_joint().unwrap();
        let proposition = record.proposition().unwrap();
        assert!(proposition.check_with(&StaleHarm, &joint).is_some());
        assert!(proposition.check_with(&SharpBounds, &joint).is_none());
    }
    assert!(report.render(OutputFormat::Text).contains("Counterexamples (JSON)"));
}
