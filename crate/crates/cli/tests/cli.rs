//! End-to-end tests of the binary: exit codes, document formats and output
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qudit-balance"))
}

fn write_temp(content: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let path = std::env::temp_dir().join(format!(
        "qudit-balance-test-{}-{n}.json",
        std::process::id()
    ));
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON value")
}

const GHZ: &str =
    r#"{"d":2,"q":3,"terms":[{"re":1,"im":0,"ket":[0,0,0]},{"re":1,"im":0,"ket":[1,1,1]}]}"#;
const W: &str = r#"{"d":2,"q":3,"terms":[{"re":1,"im":0,"ket":[0,0,1]},{"re":1,"im":0,"ket":[0,1,0]},{"re":1,"im":0,"ket":[1,0,0]}]}"#;
const SKEWED_BELL: &str =
    r#"{"d":2,"q":2,"terms":[{"re":2,"im":0,"ket":[0,0]},{"re":1,"im":0,"ket":[1,1]}]}"#;

#[test]
fn classify_ghz_reports_irreducibly_balanced() {
    let file = write_temp(GHZ);
    let out = bin().arg("classify").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "irreducibly_balanced");
    assert_eq!(v["certificate"], serde_json::json!([1, 1]));
}

#[test]
fn classify_w_reports_unbalanced() {
    let file = write_temp(W);
    let out = bin().arg("classify").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "unbalanced");
    assert_eq!(v["certificate"], serde_json::Value::Null);
}

#[test]
fn classify_rejects_malformed_documents_with_exit_2() {
    let file = write_temp(r#"{"d":3,"q":2,"terms":[{"re":1,"im":0,"ket":[0,3]}]}"#);
    let out = bin().arg("classify").arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("outside"),
        "diagnostic should name the bad label: {stderr}"
    );

    let missing = bin()
        .arg("classify")
        .arg("/nonexistent/state.json")
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn normal_form_converges_on_skewed_bell() {
    let file = write_temp(SKEWED_BELL);
    let out = bin().arg("normal-form").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "converged");
    let amplitudes = v["state"]["terms"].as_array().unwrap();
    for term in amplitudes {
        let re = term["re"].as_f64().unwrap();
        let im = term["im"].as_f64().unwrap();
        let magnitude = (re * re + im * im).sqrt();
        assert!((magnitude - 1.0 / 2.0f64.sqrt()).abs() < 1e-8);
    }
}

#[test]
fn normal_form_detects_the_null_cone() {
    let file = write_temp(W);
    let out = bin().arg("normal-form").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "null_cone");
    assert!(v["final_norm"].as_f64().unwrap() < 1e-6);
    let trajectory = v["norm_trajectory"].as_array().unwrap();
    assert!(trajectory.len() > 10);
}

#[test]
fn normal_form_reports_indeterminate_with_exit_3() {
    let file = write_temp(W);
    let out = bin()
        .args(["--max-sweeps", "3"])
        .arg("normal-form")
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "indeterminate");
}

#[test]
fn measures_on_ghz_and_shape_errors() {
    let file = write_temp(GHZ);
    let out = bin().arg("measures").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    let tangle = v
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["measure"] == "three_tangle")
        .expect("three_tangle present");
    assert!((tangle["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let four = write_temp(
        r#"{"d":2,"q":4,"terms":[{"re":1,"im":0,"ket":[0,0,0,0]},{"re":1,"im":0,"ket":[1,1,1,1]}]}"#,
    );
    let out = bin().arg("measures").arg(&four).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn measures_two_qutrit_normalized_score() {
    let file = write_temp(
        r#"{"d":3,"q":2,"terms":[{"re":1,"im":0,"ket":[0,0]},{"re":1,"im":0,"ket":[1,1]},{"re":1,"im":0,"ket":[2,2]}]}"#,
    );
    let out = bin().arg("measures").arg(&file).output().unwrap();
    let v = stdout_json(&out);
    let det = v
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["measure"] == "two_qudit_det")
        .unwrap();
    assert!((det["normalized"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn generate_ghz_round_trips_through_classify() {
    let out = bin()
        .args(["generate", "--ghz", "3", "2"])
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["q"], 3);
    let file = write_temp(&serde_json::to_string(&doc).unwrap());
    let classified = bin().arg("classify").arg(&file).output().unwrap();
    assert_eq!(stdout_json(&classified)["verdict"], "irreducibly_balanced");
}

#[test]
fn generate_from_support_document() {
    let support = write_temp(r#"{"q":2,"d":3,"B":[[0,1,2],[0,1,2]]}"#);
    let out = bin()
        .args(["generate", "--from-b"])
        .arg(&support)
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    let terms = doc["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 3);
    let amp = terms[0]["re"].as_f64().unwrap();
    assert!((amp - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
}

#[test]
fn generate_writes_to_a_file_with_out() {
    let target = std::env::temp_dir().join(format!(
        "qudit-balance-test-out-{}.json",
        std::process::id()
    ));
    let out = bin()
        .args(["generate", "--ghz", "2", "2", "--out"])
        .arg(&target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(doc["terms"].as_array().unwrap().len(), 2);
    std::fs::remove_file(&target).unwrap();
}

#[test]
fn generate_without_certificate_exits_5() {
    let support = write_temp(r#"{"q":3,"d":2,"B":[[0,0,1],[0,1,0],[1,0,0]]}"#);
    let out = bin()
        .args(["generate", "--from-b"])
        .arg(&support)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn enumerate_includes_the_two_qutrit_class() {
    let out = bin().args(["enumerate", "2", "3", "5"]).output().unwrap();
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines
        .iter()
        .any(|e| e["B"] == serde_json::json!([[0, 1, 2], [0, 1, 2]])
            && e["n"] == serde_json::json!([1, 1, 1])));
}

#[test]
fn enumerate_beyond_caps_exits_6() {
    let out = bin().args(["enumerate", "4", "3", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn verify_subcommand_reports() {
    let out = bin().args(["verify", "3", "2", "2"]).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["claim"], 3);

    let out = bin()
        .args(["verify", "1", "3", "2", "--count", "30"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["cases"], 30);
}

#[test]
fn output_is_byte_identical_for_identical_input() {
    let file = write_temp(GHZ);
    let a = bin().arg("classify").arg(&file).output().unwrap();
    let b = bin().arg("classify").arg(&file).output().unwrap();
    assert_eq!(a.stdout, b.stdout);

    let a = bin()
        .args(["--seed", "9", "verify", "1", "2", "2", "--count", "20"])
        .output()
        .unwrap();
    let b = bin()
        .args(["--seed", "9", "verify", "1", "2", "2", "--count", "20"])
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn human_format_renders_plain_text() {
    let file = write_temp(GHZ);
    let out = bin()
        .args(["--format", "human", "classify"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verdict: \"irreducibly_balanced\""), "{text}");
    assert!(serde_json::from_str::<serde_json::Value>(&text).is_err());
}

#[test]
fn cap_l_flag_is_enforced() {
    let file = write_temp(GHZ);
    let out = bin()
        .args(["--cap-l", "1", "classify"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));
}
