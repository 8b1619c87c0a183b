//! End-to-end tests of the `spt-index` binary: every command family is run
//! as a subprocess and judged on its exit code and both output streams.
//!
//! Exit codes partition outcomes — 0 success, 1 a checked identity fails,
//! 2 usage or input error — and the JSON report goes to stdout with a human
//! summary on stderr (swapped by `--format text`).

use serde_json::Value;
use std::process::Command;

/// Runs the binary with `args`; returns (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spt-index"))
        .args(args)
        .output()
        .expect("binary launches");
    (
        out.status.code().expect("terminated by exit, not signal"),
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        String::from_utf8(out.stderr).expect("stderr is UTF-8"),
    )
}

fn report(stdout: &str) -> Value {
    serde_json::from_str(stdout).unwrap_or_else(|e| panic!("stdout is a JSON report: {e}\n{stdout}"))
}

#[test]
fn make_writes_a_standard_representative_that_checks_clean() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("z3_level1.json");
    let path_str = path.display().to_string();

    let (code, stdout, _) =
        run(&["cocycle", "make", "--group", "z3", "--level", "1", "--out", &path_str]);
    assert_eq!(code, 0, "make exits 0");
    let rep = report(&stdout);
    assert_eq!(rep["cocycle"]["denominator"], 3, "ζ₃ phases over denominator 3");
    assert_eq!(
        rep["cocycle"]["exponents"].as_array().map(Vec::len),
        Some(27),
        "flat |G|³ exponent array"
    );

    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).expect("file written")).unwrap();
    assert_eq!(written["denominator"], 3, "written file carries the same table");

    let (code, stdout, stderr) = run(&["cocycle", "check", &path_str]);
    assert_eq!(code, 0, "check exits 0 on a genuine cocycle");
    let rep = report(&stdout);
    assert_eq!(rep["cocycle_identity"], true);
    assert_eq!(rep["normalized"], true);
    assert!(stderr.contains("pass"), "summary says pass: {stderr}");
}

#[test]
fn compare_separates_the_two_classes_of_z2() {
    let (code, stdout, stderr) = run(&["cocycle", "compare", "z2:1", "z2:0"]);
    assert_eq!(code, 1, "distinct classes exit 1");
    assert_eq!(report(&stdout)["same_class"], false);
    assert!(stderr.contains("distinct classes"), "summary: {stderr}");

    let (code, stdout, _) = run(&["cocycle", "compare", "z4:2", "z4:2"]);
    assert_eq!(code, 0, "identical specs exit 0");
    let rep = report(&stdout);
    assert_eq!(rep["same_class"], true);
    assert!(rep["witness"].is_object(), "witness 2-cochain reported: {rep}");

    let (code, _, _) = run(&["cocycle", "compare", "z2:1", "z3:1"]);
    assert_eq!(code, 2, "mismatched groups are an input error");
}

#[test]
fn level_identifies_the_class_of_a_shorthand_cocycle() {
    let (code, stdout, _) = run(&["cocycle", "level", "z4:3"]);
    assert_eq!(code, 0);
    assert_eq!(report(&stdout)["level"], 3);
}

#[test]
fn index_reproduces_the_z2_level_one_table() {
    let (code, stdout, stderr) =
        run(&["index", "--group", "z2", "--level", "1", "--length", "6", "--cut", "3"]);
    assert_eq!(code, 0, "pipeline exits 0: {stderr}");
    let rep = report(&stdout);
    assert_eq!(rep["denominator"], 2);
    let exps: Vec<i64> = rep["extracted_exponents"]
        .as_array()
        .expect("exponent array")
        .iter()
        .map(|v| v.as_i64().expect("integer exponent"))
        .collect();
    assert_eq!(exps, vec![0, 0, 0, 0, 0, 0, 0, 1], "only ω(1,1,1) = −1 is nontrivial");
    assert_eq!(rep["cocycle_check"], true);
    assert_eq!(rep["class"]["matches_input"], true);
    assert_eq!(rep["class"]["cyclic_level"], 1);
    assert!(stderr.contains("ω(1,1,1) = -1"), "summary prints the entry: {stderr}");
}

#[test]
fn index_of_the_trivial_level_is_all_ones() {
    let (code, stdout, _) = run(&["index", "--group", "z4", "--level", "0"]);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    let all_zero = rep["extracted_exponents"]
        .as_array()
        .expect("exponent array")
        .iter()
        .all(|v| v == 0);
    assert!(all_zero, "trivial class extracts the all-ones table: {rep}");
    assert_eq!(rep["class"]["cyclic_level"], 0);
}

#[test]
fn index_rejects_chains_shorter_than_two() {
    let (code, _, stderr) = run(&["index", "--group", "z2", "--level", "1", "--length", "1"]);
    assert_eq!(code, 2, "bounds violations are usage errors");
    assert!(stderr.contains("length 1 < 2"), "error names the bound: {stderr}");
}

#[test]
fn invariance_suite_passes_and_reports_deterministically() {
    let args = ["verify", "invariance", "--group", "z2", "--level", "1", "--seed", "7"];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["seed"], 7);
    let checks = rep["checks"].as_array().expect("check list");
    assert!(checks.len() >= 6, "cuts, lengths, regaugings, transport: {checks:?}");

    let (_, stdout2, _) = run(&args);
    assert_eq!(stdout, stdout2, "same config + seed → byte-identical report");
}

#[test]
fn stacking_inverse_levels_of_z3_gives_the_trivial_class() {
    let (code, stdout, stderr) =
        run(&["verify", "stacking", "--group", "z3", "--levels", "1,2"]);
    assert_eq!(code, 0, "stacking exits 0: {stderr}");
    let rep = report(&stdout);
    assert_eq!(rep["entrywise_product"], true, "stacked table multiplies entrywise");
    assert_eq!(rep["stacked_level"], 0);
    assert_eq!(rep["certified_level_sum"], true);
    assert!(stderr.contains("product class trivial"), "summary: {stderr}");
}

#[test]
fn patch_oracle_compensates_and_matches_the_chain_table() {
    let (code, stdout, stderr) =
        run(&["verify", "patch", "--group", "z2", "--level", "1", "--W", "4", "--H", "4"]);
    assert_eq!(code, 0, "patch verification exits 0: {stderr}");
    let rep = report(&stdout);
    assert_eq!(rep["assignment"], "outside_legs", "auto mode picks the working pairing");
    assert_eq!(rep["crosscheck_match"], true);
    assert_eq!(rep["compensation_scan"], "exhaustive");
    let overlaps = rep["compensation_overlaps"].as_array().expect("overlap list");
    assert!(
        overlaps.iter().all(|v| v == "0"),
        "every ⟨ψ|U_K W₊|ψ⟩ is exactly 1: {overlaps:?}"
    );
}

#[test]
fn patch_accepts_a_json_run_configuration() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"group": "z3", "cocycle": "z3:1", "W": 6, "H": 2,
           "bc": "torus", "link_assignment": "outside_legs"}"#,
    )
    .unwrap();
    let (code, stdout, _) = run(&["verify", "patch", "--config", &path.display().to_string()]);
    assert_eq!(code, 0);
    let rep = report(&stdout);
    assert_eq!(rep["W"], 6);
    assert_eq!(rep["crosscheck_match"], true);
    assert_eq!(rep["pass"], true);
}

#[test]
fn format_text_swaps_the_two_streams() {
    let (code, stdout, stderr) = run(&["cocycle", "check", "z2:1", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("pass"), "text summary on stdout: {stdout}");
    let rep: Value = serde_json::from_str(&stderr).expect("JSON report moved to stderr");
    assert_eq!(rep["cocycle_identity"], true);
}

#[test]
fn malformed_json_reports_the_parse_location() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, r#"{"group": "z2", "denominator": 2,"#).unwrap();
    let (code, _, stderr) = run(&["cocycle", "check", &path.display().to_string()]);
    assert_eq!(code, 2, "parse failures are input errors");
    assert!(stderr.contains("line 1"), "error carries the parse location: {stderr}");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let cases: &[&[&str]] = &[
        &["index"],
        &["index", "--cocycle", "/nonexistent/cocycle.json"],
        &["index", "--group", "z2*z2", "--level", "1"],
        &["verify", "patch", "--group", "z2", "--level", "1"],
        &["verify", "patch", "--group", "z2", "--level", "1", "--W", "3", "--H", "2"],
        &["verify", "stacking", "--group", "z3", "--levels", "one,two"],
        &["cocycle", "make", "--group", "z2*z2", "--level", "1"],
        &["not-a-command"],
    ];
    for args in cases {
        let (code, _, stderr) = run(args);
        assert_eq!(code, 2, "args {args:?} exit 2; stderr: {stderr}");
    }
}
