use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Runs the binary quietly; returns the exit code and stdout.
fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_taudilate"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).unwrap())
}

fn run_cert(args: &[&str]) -> (i32, Value) {
    let (code, stdout) = run(args);
    (code, serde_json::from_str(&stdout).expect("certificate is JSON"))
}

fn failing_checks(cert: &Value) -> Vec<&Value> {
    cert["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect()
}

fn generate_to(dir: &tempfile::TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let (code, _) = run(&full);
    assert_eq!(code, 0, "generate {args:?}");
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_matrix_units_passes() {
    let (code, cert) = run_cert(&["validate", path_str(&data("m2_matrix_units.json"))]);
    assert_eq!(code, 0);
    assert_eq!(cert["verdict"], "pass");
    assert_eq!(cert["schema"], "taudilate-certificate/1");
    assert!(!cert["checks"].as_array().unwrap().is_empty());
}

#[test]
fn validate_rejects_non_star_closed_basis() {
    let (code, cert) = run_cert(&["validate", path_str(&data("not_star_closed.json"))]);
    assert_eq!(code, 1);
    assert_eq!(cert["verdict"], "fail");
    let msg = cert["error"]["message"].as_str().unwrap();
    assert!(msg.contains("basis[2]"), "{msg}");
}

#[test]
fn validate_names_the_offending_product() {
    let (code, cert) = run_cert(&["validate", path_str(&data("not_product_closed.json"))]);
    assert_eq!(code, 1);
    let msg = cert["error"]["message"].as_str().unwrap();
    assert!(msg.contains("basis[1]") && msg.contains("basis[2]"), "{msg}");
}

#[test]
fn validate_rejects_swapped_cayley_entry() {
    let (code, cert) = run_cert(&["validate", path_str(&data("z3_swapped.json"))]);
    assert_eq!(code, 1);
    assert!(cert["error"]["message"].as_str().unwrap().contains("LatinSquare"));
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"version\": \"taudilate-problem/1\", \"algebras\": [").unwrap();
    let (code, cert) = run_cert(&["validate", path_str(&path)]);
    assert_eq!(code, 2);
    assert_eq!(cert["error"]["class"], "malformed-input");

    let (code, _) = run(&["validate", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_map_is_malformed_input() {
    let (code, _) = run_cert(&["dilate", path_str(&data("identity_channel.json")), "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn dilate_identity_channel() {
    let (code, cert) = run_cert(&["dilate", path_str(&data("identity_channel.json")), "id"]);
    assert_eq!(code, 0);
    assert_eq!(cert["quantities"]["dilation_dim"], 2);
}

#[test]
fn dilate_transpose_fails_with_witness() {
    let (code, cert) = run_cert(&["dilate", path_str(&data("transpose.json")), "transpose"]);
    assert_eq!(code, 1);
    let bad = failing_checks(&cert);
    assert_eq!(bad.len(), 1);
    let witness = bad[0]["witness"].as_str().unwrap();
    assert!(witness.starts_with("λ_min = -1.0"), "{witness}");
}

#[test]
fn dilate_zero_map() {
    let (code, cert) = run_cert(&["dilate", path_str(&data("zero_map.json")), "zero"]);
    assert_eq!(code, 0);
    assert_eq!(cert["quantities"]["dilation_dim"], 0);
}

#[test]
fn covariant_trivial_and_z2_pass() {
    let dir = tempfile::tempdir().unwrap();
    for group in ["trivial", "z2"] {
        let file = generate_to(&dir, &format!("{group}.json"), &["covariant", "--group", group, "--seed", "1"]);
        let (code, cert) = run_cert(&["covariant", path_str(&file), "instance"]);
        assert_eq!(code, 0, "{group}");
        assert!(cert["checks"].as_array().unwrap().len() >= 4);
    }
}

#[test]
fn covariant_detects_corrupted_u() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate_to(&dir, "z2.json", &["covariant", "--group", "z2", "--seed", "1"]);
    let mut problem: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let u = problem["reps"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|r| r["name"] == "u")
        .unwrap();
    for entry in u["images"][1]["data"].as_array_mut().unwrap() {
        for part in entry.as_array_mut().unwrap() {
            *part = Value::from(-part.as_f64().unwrap());
        }
    }
    std::fs::write(&file, serde_json::to_string(&problem).unwrap()).unwrap();

    let (code, cert) = run_cert(&["covariant", path_str(&file), "instance"]);
    assert_eq!(code, 1);
    let bad = failing_checks(&cert);
    assert!(!bad.is_empty());
    assert!(bad.iter().all(|c| c["witness"].is_string()));
}

fn max_residual(cert: &Value) -> f64 {
    cert["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["residual"].as_str().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn roundtrip_trivial_z2_and_s3_stress() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str], f64); 4] = [
        ("trivial", &["covariant", "--group", "trivial"], 1e-12),
        ("z2", &["covariant", "--group", "z2", "--seed", "2"], 1e-8),
        ("z2_crossed", &["crossed", "--group", "z2", "--seed", "2"], 1e-8),
        ("s3", &["covariant", "--group", "s3", "--n", "3", "--junk", "1", "--seed", "5"], 1e-7),
    ];
    for (name, args, bound) in cases {
        let file = generate_to(&dir, &format!("{name}.json"), args);
        let (code, cert) = run_cert(&["roundtrip", path_str(&file), "instance"]);
        assert_eq!(code, 0, "{name}");
        let worst = max_residual(&cert);
        assert!(worst <= bound, "{name}: {worst:e}");
    }
}

#[test]
fn generated_cp_seed_42_passes() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate_to(&dir, "cp.json", &["cp", "--seed", "42", "--kraus", "2"]);
    assert_eq!(run(&["validate", path_str(&file)]).0, 0);
    let (code, cert) = run_cert(&["dilate", path_str(&file), "tau"]);
    assert_eq!(code, 0);
    assert!(cert["checks"][0]["pass"].as_bool().unwrap());
}

#[test]
fn generated_covariant_seed_1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate_to(&dir, "cov.json", &["covariant", "--seed", "1", "--group", "z2"]);
    assert_eq!(run(&["covariant", path_str(&file), "instance"]).0, 0);
}

#[test]
fn generated_identity_tau_map_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate_to(&dir, "id.json", &["tau", "--identity", "--n", "1", "--seed", "9"]);
    let problem: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let t = &problem["tau_maps"][0];
    let source = problem["modules"].as_array().unwrap().iter().find(|m| m["name"] == t["source"]).unwrap();
    let target = problem["modules"].as_array().unwrap().iter().find(|m| m["name"] == "Eprime").unwrap();
    assert_eq!(source["rows"], target["rows"]);
    assert_eq!(source["full"], true);
    // T = id sends each basis element of the full module to itself
    let algebra = problem["algebras"].as_array().unwrap().iter().find(|a| a["name"] == source["algebra"]).unwrap();
    let d = algebra["ambient_dim"].as_u64().unwrap() as usize;
    let images = t["images"].as_array().unwrap();
    assert_eq!(images.len(), d * d);
    for (k, img) in images.iter().enumerate() {
        for (idx, entry) in img["data"].as_array().unwrap().iter().enumerate() {
            let expected = if idx == k { 1.0 } else { 0.0 };
            assert_eq!(entry[0].as_f64().unwrap(), expected);
            assert_eq!(entry[1].as_f64().unwrap(), 0.0);
        }
    }
    assert_eq!(run(&["dilate", path_str(&file), "T"]).0, 0);
}

#[test]
fn certificates_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate_to(&dir, "cov.json", &["covariant", "--group", "z3", "--seed", "4"]);
    let body = |v: &Value| {
        let mut v = v.clone();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    for command in ["validate", "covariant", "roundtrip"] {
        let mut args = vec![command, path_str(&file)];
        if command != "validate" {
            args.push("instance");
        }
        let (_, a) = run_cert(&args);
        let (_, b) = run_cert(&args);
        assert_eq!(body(&a), body(&b), "{command}");
    }
}

#[test]
fn generation_is_deterministic() {
    for kind in ["cp", "tau", "covariant", "crossed"] {
        let a = run(&["generate", kind, "--seed", "17"]);
        let b = run(&["generate", kind, "--seed", "17"]);
        assert_eq!(a.0, 0);
        assert_eq!(a, b, "{kind}");
    }
    assert_ne!(run(&["generate", "cp", "--seed", "1"]).1, run(&["generate", "cp", "--seed", "2"]).1);
}

#[test]
fn tolerance_flags_reach_the_certificate() {
    let (code, cert) = run_cert(&[
        "validate",
        path_str(&data("m2_matrix_units.json")),
        "--tol",
        "1e-6",
        "--gram-cutoff",
        "1e-8",
    ]);
    assert_eq!(code, 0);
    assert_eq!(cert["tolerance"]["abs_eps"], 1e-6);
    assert_eq!(cert["tolerance"]["gram_cutoff_rel"], 1e-8);

    let (code, cert) = run_cert(&["validate", path_str(&data("m2_matrix_units.json")), "--tol=-1"]);
    assert_eq!(code, 2);
    assert_eq!(cert["error"]["class"], "malformed-input");
}
