//! Manifest parsing contract: the bundled benchmark manifest resolves to
//! four experiments, and malformed manifests fail with errors that name the
//! offending key.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nnlms-lab"))
}

fn bundled_manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests/paper-fig1.json")
}

fn write_manifest(content: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new()
        .suffix(".json")
        .tempfile()
        .unwrap();
    file.write_all(content.as_bytes()).unwrap();
    file
}

const VALID_PREAMBLE: &str = r#"
  "base_seed": 7,
  "system": { "true_weights": [0.5, -0.1], "noise_variance": 0.01 },
  "input": { "pole": 0.5, "innovation_variance": 0.75 }
"#;

fn stderr_of(file: &tempfile::NamedTempFile) -> String {
    let output = bin().arg("predict").arg(file.path()).output().unwrap();
    assert_eq!(
        output.status.code(),
        Some(2),
        "expected usage-error exit, stdout: {}",
        String::from_utf8_lossy(&output.stdout)
    );
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn bundled_manifest_resolves_to_four_experiments() {
    let output = bin().arg("predict").arg(bundled_manifest()).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let predictions = doc["predictions"].as_array().unwrap();
    assert_eq!(predictions.len(), 4);
    let algorithms: Vec<&str> = predictions
        .iter()
        .map(|p| p["algorithm"].as_str().unwrap())
        .collect();
    assert_eq!(
        algorithms,
        vec![
            "nnlms",
            "normalized-nnlms",
            "exponential-nnlms",
            "sign-sign-nnlms"
        ]
    );
    for p in predictions {
        assert_eq!(p["status"], "ok");
        assert!(p["prediction"]["emse_total"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn empty_file_is_a_parse_error() {
    let file = write_manifest("");
    let stderr = stderr_of(&file);
    assert!(stderr.contains("cannot parse manifest"), "stderr: {stderr}");
}

#[test]
fn unknown_key_is_rejected_and_named() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "step_sizee": 0.1,
        "experiments": [ {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01,
                            "initial_weights": 0.1, "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("step_sizee"), "stderr: {stderr}");
    assert!(stderr.contains("line"), "stderr: {stderr}");
}

#[test]
fn missing_required_key_is_named() {
    // step_size omitted from the experiment entry.
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "nnlms",
                            "initial_weights": 0.1, "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("step_size"), "stderr: {stderr}");
}

#[test]
fn exponential_without_exponent_is_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "exp", "algorithm": "exponential-nnlms", "step_size": 0.01,
                            "initial_weights": 0.1, "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("exponent"), "stderr: {stderr}");
    assert!(stderr.contains("exp"), "stderr: {stderr}");
}

#[test]
fn exponent_on_wrong_algorithm_is_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01, "exponent": 0.5,
                            "initial_weights": 0.1, "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("exponent"), "stderr: {stderr}");
}

#[test]
fn unknown_algorithm_is_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "projected-lms", "step_size": 0.01,
                            "initial_weights": 0.1, "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("projected-lms"), "stderr: {stderr}");
}

#[test]
fn duplicate_names_are_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [
          {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01,
             "initial_weights": 0.1, "iterations": 100, "runs": 1 }},
          {{ "name": "a", "algorithm": "sign-sign-nnlms", "step_size": 0.01,
             "initial_weights": 0.1, "iterations": 100, "runs": 1 }}
        ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("duplicate"), "stderr: {stderr}");
}

#[test]
fn initial_weight_vector_of_wrong_length_is_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01,
                            "initial_weights": [0.1, 0.1, 0.1], "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(
        stderr.contains("initial weights"),
        "stderr: {stderr}"
    );
}

#[test]
fn explicit_initial_weight_vector_is_accepted() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01,
                            "initial_weights": [0.2, 0.3], "iterations": 100, "runs": 1 }} ] }}"#
    ));
    let output = bin().arg("predict").arg(file.path()).output().unwrap();
    assert!(output.status.success());
}

#[test]
fn too_few_iterations_are_rejected() {
    let file = write_manifest(&format!(
        r#"{{ {VALID_PREAMBLE},
        "experiments": [ {{ "name": "a", "algorithm": "nnlms", "step_size": 0.01,
                            "initial_weights": 0.1, "iterations": 99, "runs": 1 }} ] }}"#
    ));
    let stderr = stderr_of(&file);
    assert!(stderr.contains("iterations"), "stderr: {stderr}");
}
