use assert_cmd::Command;
use predicates::prelude::*;
use serde_json::Value;
use std::path::Path;

fn ergomix() -> Command {
    Command::cargo_bin("ergomix").unwrap()
}

fn write_spec(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const DEPOL_HALF: &str = r#"{
  "algebra": { "blocks": [{ "dim": 2, "weight": 0.5 }] },
  "map": { "kind": "depolarizing", "lambda": 0.5 }
}"#;

const IDENTITY_QUBIT: &str = r#"{
  "algebra": { "blocks": [{ "dim": 2, "weight": 0.5 }] },
  "map": {
    "kind": "kraus",
    "operators": [[[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]]
  }
}"#;

fn run_analyze(spec_body: &str, extra: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", spec_body);
    let out = ergomix()
        .arg("analyze")
        .arg(&spec)
        .args(extra)
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    serde_json::from_slice(&out).unwrap()
}

#[test]
fn depolarizing_report_matches_closed_form() {
    let doc = run_analyze(DEPOL_HALF, &[]);
    let alpha_bar = doc["ergodicity"]["alpha_bar"].as_f64().unwrap();
    assert!((alpha_bar - 0.5).abs() < 1e-9);
    assert_eq!(doc["predicates"]["stochastic"], Value::Bool(true));
    assert_eq!(doc["predicates"]["positive"]["status"], "certified");

    let verdict = &doc["stability"]["verdict"];
    assert_eq!(verdict["kind"], "uniformly_stable");
    assert_eq!(verdict["n0"], 1);
    assert!((verdict["gamma"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    assert_eq!(doc["mixing"]["rho_bar"]["kind"], "zero");
    assert_eq!(doc["strong_stability"]["verdict"]["kind"], "strongly_stable");
    assert_eq!(doc["tool"]["name"], "ergomix");
    assert!(doc.get("timings_ms").is_none());
}

#[test]
fn identity_channel_is_one_and_undetermined() {
    let doc = run_analyze(IDENTITY_QUBIT, &["--nmax", "3"]);
    assert_eq!(doc["mixing"]["rho_bar"]["kind"], "one");
    let verdict = &doc["stability"]["verdict"];
    assert_eq!(verdict["kind"], "undetermined");
    assert_eq!(verdict["n_max"], 3);
    assert!((doc["ergodicity"]["alpha_bar"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn only_filter_limits_sections() {
    let doc = run_analyze(DEPOL_HALF, &["--only", "dobrushin"]);
    assert!(doc.get("ergodicity").is_some());
    assert!(doc.get("predicates").is_none());
    assert!(doc.get("stability").is_none());
    assert!(doc.get("mixing").is_none());
}

#[test]
fn spec_seed_is_used_and_flag_wins() {
    let with_seed = r#"{
      "algebra": { "blocks": [{ "dim": 2, "weight": 0.5 }] },
      "map": { "kind": "depolarizing", "lambda": 0.5 },
      "analysis": { "seed": 7 }
    }"#;
    let doc = run_analyze(with_seed, &["--only", "dobrushin"]);
    assert_eq!(doc["seed"], 7);
    let doc = run_analyze(with_seed, &["--only", "dobrushin", "--seed", "9"]);
    assert_eq!(doc["seed"], 9);
}

#[test]
fn malformed_specs_point_at_the_field() {
    let dir = tempfile::tempdir().unwrap();

    let cases = [
        (r#"{"map": {"kind": "depolarizing", "lambda": "x"},
             "algebra": {"blocks": [{"dim": 2, "weight": 0.5}]}}"#, "/map/lambda"),
        (r#"{"map": {"kind": "depolarizing", "lambda": 0.5}}"#, "/algebra"),
        (r#"{"map": {"kind": "warp"}, "algebra": {"blocks": [{"dim": 2}]}}"#, "/map/kind"),
        (r#"{"map": {"kind": "classical", "matrix": [[0.5, 0.5], [1.0]]}}"#, "/map/matrix/1"),
        (r#"{"algebra": {"blocks": [{"dim": 0}]},
             "map": {"kind": "depolarizing", "lambda": 0.5}}"#, "/algebra/blocks/0/dim"),
        (r#"{"surprise": 1, "map": {"kind": "depolarizing", "lambda": 0.5}}"#, "/surprise"),
        ("not json", "/"),
    ];
    for (i, (body, pointer)) in cases.iter().enumerate() {
        let spec = write_spec(dir.path(), &format!("bad{i}.json"), body);
        ergomix()
            .arg("analyze")
            .arg(&spec)
            .assert()
            .code(2)
            .stderr(predicate::str::contains(&format!("invalid spec at {pointer}")));
    }
}

#[test]
fn missing_file_is_an_input_error() {
    ergomix()
        .args(["analyze", "/nonexistent/spec.json"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("cannot read"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", DEPOL_HALF);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        ergomix().arg("analyze").arg(&spec).arg("--out").arg(out).assert().success();
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn timings_flag_adds_the_only_nondeterministic_field() {
    let doc = run_analyze(DEPOL_HALF, &["--only", "dobrushin", "--timings"]);
    assert!(doc["timings_ms"]["dobrushin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn dobrushin_subcommand_is_a_shorthand() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", DEPOL_HALF);
    let out = ergomix()
        .arg("dobrushin")
        .arg(&spec)
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let doc: Value = serde_json::from_slice(&out).unwrap();
    assert!(doc.get("ergodicity").is_some() && doc.get("predicates").is_some());
    assert!(doc.get("stability").is_none());
}

#[test]
fn non_stochastic_map_skips_stability_but_still_mixes() {
    let scaled = r#"{
      "algebra": { "blocks": [{ "dim": 1 }, { "dim": 1 }] },
      "map": { "kind": "transfer", "matrix": [[0.8, 0.0], [0.0, 0.8]] }
    }"#;
    let doc = run_analyze(scaled, &["--only", "stability,mixing"]);
    assert!(doc.get("stability").is_none());
    assert!(doc["stability_skipped"].as_str().is_some());
    assert_eq!(doc["mixing"]["rho_bar"]["kind"], "estimate");
}

#[test]
fn shift_demo_writes_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    ergomix()
        .args(["shift-demo", "2", "4", "8", "--epsilon", "0.25", "--csv"])
        .arg(dir.path())
        .assert()
        .success();

    let escape = std::fs::read_to_string(dir.path().join("escape_profile.csv")).unwrap();
    let lines: Vec<&str> = escape.lines().collect();
    assert_eq!(lines[0], "d,n,norm");
    // One row per n = 0..=d for each d.
    assert_eq!(lines.len(), 1 + (2 + 1) + (4 + 1) + (8 + 1));
    assert_eq!(lines[1], "2,0,1");
    assert_eq!(lines[2], "2,1,0");

    let degen = std::fs::read_to_string(dir.path().join("degeneration.csv")).unwrap();
    let lines: Vec<&str> = degen.lines().collect();
    assert_eq!(lines[0], "d,epsilon,delta_max");
    assert_eq!(lines[1], "2,0.25,0.5");
    assert_eq!(lines[3], "8,0.25,0.125");
}

#[test]
fn shift_demo_requires_dims() {
    ergomix().arg("shift-demo").assert().code(2);
}

#[test]
fn oracle_check_passes_at_default_seed() {
    let out = ergomix()
        .arg("oracle-check")
        .assert()
        .success()
        .get_output()
        .stdout
        .clone();
    let doc: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(doc["pass"], Value::Bool(true));
    assert!(!doc["cases"].as_array().unwrap().is_empty());
}

#[test]
fn corrupted_oracle_run_fails_with_witness() {
    let out = ergomix()
        .arg("oracle-check")
        .env("ERGOMIX_FAULT_INJECT", "1")
        .assert()
        .code(1)
        .stderr(predicate::str::contains("oracle disagreement"))
        .get_output()
        .stdout
        .clone();
    let doc: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(doc["pass"], Value::Bool(false));
    let worst = &doc["worst"];
    assert!(worst["diff"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(worst["pass"], Value::Bool(false));
}

#[test]
fn thread_cap_env_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", DEPOL_HALF);
    ergomix()
        .arg("analyze")
        .arg(&spec)
        .args(["--only", "dobrushin"])
        .env("ERGOMIX_THREADS", "1")
        .assert()
        .success();
}
