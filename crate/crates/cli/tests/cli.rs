//! End-to-end tests of the command-line interface: exit codes, witnesses,
//! and the schemas of what each subcommand writes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn privext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn validate_accepts_the_worked_fixture() {
    let out = privext(&["validate", fixture("worked_line.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("valid"));
}

#[test]
fn validate_reports_bad_row_sums_with_the_label() {
    let dir = std::env::temp_dir().join("privext-cli-validate");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = std::fs::read_to_string(fixture("worked_line.json"))
        .unwrap()
        .replace("0.48", "0.46");
    let path = dir.join("bad_sum.json");
    std::fs::write(&path, bad).unwrap();
    let out = privext(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("\"1\""), "{}", stderr(&out));
}

#[test]
fn validate_reports_triangle_violations_with_the_witness() {
    let dir = std::env::temp_dir().join("privext-cli-validate");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = std::fs::read_to_string(fixture("worked_line.json"))
        .unwrap()
        .replace("[0, 1, 2]", "[0, 1, 9]")
        .replace("[2, 1, 0]", "[9, 1, 0]");
    let path = dir.join("bad_triangle.json");
    std::fs::write(&path, bad).unwrap();
    let out = privext(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("(0,1,2)"), "{}", stderr(&out));
}

#[test]
fn validate_rejects_malformed_json_with_io_status() {
    let dir = std::env::temp_dir().join("privext-cli-validate");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = privext(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

#[test]
fn measure_matches_ln3_and_verifies_claims() {
    let file = fixture("randomized_response.json");
    let out = privext(&["measure", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("1.09861228866810"), "{}", stdout(&out));

    let out = privext(&[
        "measure",
        file.to_str().unwrap(),
        "--claimed-eps",
        "1.0986122886681098",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("pass"));

    let out = privext(&["measure", file.to_str().unwrap(), "--claimed-eps", "1.0"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
    assert!(stdout(&out).contains("witness"));
}

#[test]
fn measure_reports_zero_for_a_constant_mechanism() {
    let dir = std::env::temp_dir().join("privext-cli-measure");
    std::fs::create_dir_all(&dir).unwrap();
    let constant = std::fs::read_to_string(fixture("randomized_response.json"))
        .unwrap()
        .replace("[0.75, 0.25]", "[0.5, 0.5]")
        .replace("[0.25, 0.75]", "[0.5, 0.5]");
    let path = dir.join("constant.json");
    std::fs::write(&path, constant).unwrap();
    let out = privext(&["measure", path.to_str().unwrap(), "--claimed-eps", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("measured epsilon = 0"));
    assert!(stdout(&out).contains("pass"));
}

#[test]
fn extend_writes_the_worked_extension() {
    let dir = std::env::temp_dir().join("privext-cli-extend");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("ext.json");
    let out = privext(&[
        "extend",
        fixture("worked_line.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // default eps is announced loudly
    assert!(stderr(&out).contains("measured epsilon on the hypothesis set"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\"2\": ["));
    assert!(text.contains("0.5200000000000001") || text.contains("0.52"));
    assert!(text.contains("\"eps_in\""));
    assert!(text.contains("\"base\": \"0\""));
}

#[test]
fn extend_with_full_hypothesis_returns_the_input_rows() {
    let dir = std::env::temp_dir().join("privext-cli-extend");
    std::fs::create_dir_all(&dir).unwrap();
    let text = std::fs::read_to_string(fixture("worked_line.json"))
        .unwrap()
        .replace(
            "\"rows\": {\n    \"0\": [0.6, 0.4],\n    \"1\": [0.52, 0.48]\n  }",
            "\"rows\": {\n    \"0\": [0.6, 0.4],\n    \"1\": [0.52, 0.48],\n    \"2\": [0.5, 0.5]\n  }",
        )
        .replace("\"hypothesis\": [\"0\", \"1\"]", "\"hypothesis\": [\"0\", \"1\", \"2\"]");
    let path = dir.join("full_h.json");
    std::fs::write(&path, &text).unwrap();
    let out_path = dir.join("full_h_ext.json");
    let out = privext(&[
        "extend",
        path.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ext = std::fs::read_to_string(&out_path).unwrap();
    assert!(ext.contains("0.6"));
    assert!(ext.contains("0.5,"));
}

#[test]
fn extend_rejects_non_private_input_with_precondition_status() {
    let out = privext(&[
        "extend",
        fixture("worked_line.json").to_str().unwrap(),
        "--eps",
        "0.05",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not eps-private"), "{}", stderr(&out));
}

#[test]
fn extend_requires_a_hypothesis_set() {
    let out = privext(&[
        "extend",
        fixture("randomized_response.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("hypothesis"));
}

#[test]
fn audit_passes_on_the_worked_fixture() {
    let out = privext(&["audit", fixture("worked_line.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = stdout(&out);
    assert!(table.contains("agreement_on_h"));
    assert!(table.contains("set_level_dp"));
    assert!(table.contains("PASS  overall"));
}

#[test]
fn audit_fails_on_a_perturbed_fixture() {
    let dir = std::env::temp_dir().join("privext-cli-audit");
    std::fs::create_dir_all(&dir).unwrap();
    let original = std::fs::read_to_string(fixture("worked_line.json")).unwrap();

    // one probability bumped by 0.05: the row no longer sums to 1
    let path = dir.join("bad_sum.json");
    std::fs::write(&path, original.replace("0.52,", "0.57,")).unwrap();
    let out = privext(&["audit", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    // 0.05 of mass shifted away from the base row: sums still hold but the
    // input stops being private at the unperturbed instance's epsilon
    let path = dir.join("not_private.json");
    std::fs::write(&path, original.replace("[0.52, 0.48]", "[0.47, 0.53]")).unwrap();
    let out = privext(&[
        "audit",
        path.to_str().unwrap(),
        "--eps",
        "0.1823215567939546",
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("not eps-private"), "{}", stderr(&out));
}

#[test]
fn audit_emits_json_when_asked() {
    let out = privext(&[
        "audit",
        fixture("worked_line.json").to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let json = stdout(&out);
    assert!(json.contains("\"overall\": true"));
    assert!(json.contains("\"verdict_agreement\""));
}

#[test]
fn graph_experiment_runs_from_config_and_flags() {
    let out = privext(&[
        "graph-experiment",
        "--config",
        fixture("graph_experiment.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.starts_with("p,estimator,mse,stderr,trials,eps,n,degree_bound,seed\n"));
    assert_eq!(csv.lines().count(), 5); // header + 2 p-values x 2 estimators

    let out = privext(&[
        "graph-experiment",
        "--n",
        "4",
        "--degree-bound",
        "2",
        "--eps",
        "1.0",
        "--p",
        "0.5",
        "--trials",
        "50",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn graph_experiment_rejects_oversized_n_and_missing_config() {
    let out = privext(&[
        "graph-experiment",
        "--n",
        "9",
        "--degree-bound",
        "2",
        "--eps",
        "1.0",
    ]);
    assert_eq!(code(&out), 2);

    let out = privext(&["graph-experiment", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn unknown_flags_are_rejected() {
    let out = privext(&[
        "measure",
        fixture("randomized_response.json").to_str().unwrap(),
        "--frobnicate",
    ]);
    assert_ne!(code(&out), 0);
}
