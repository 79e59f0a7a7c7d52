use std::path::Path;

fn run(out: &Path, args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["tatesha", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = tatesha_cli::main_with_args(argv, &mut so, &mut se);
    (code, String::from_utf8(so).unwrap(), String::from_utf8(se).unwrap())
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_q7() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = run(d.path(), &["verify", "--q", "7", "--a", "1"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&d.path().join("verify_q7_a1.json"));
    assert_eq!(v["schema"], "tatesha/1");
    assert_eq!(v["passed"], true);
    assert_eq!(v["out_of_hypothesis"], false);
}

#[test]
fn small_characteristic_is_a_structured_error() {
    let d = tempfile::tempdir().unwrap();
    let (code, out, err) = run(d.path(), &["lfun", "--q", "5"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    let e: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"]["kind"], "small_characteristic");
}

#[test]
fn prime_power_is_required() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = run(d.path(), &["lfun", "--q", "12"]);
    assert_eq!(code, 1);
    assert!(err.contains("not_prime_power"));
}

#[test]
fn small_characteristic_override_is_tagged() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = run(d.path(), &["lfun", "--q", "5", "--allow-small-char"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&d.path().join("lfun_q5_a1_report.json"));
    assert_eq!(v["out_of_hypothesis"], true);
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["frobnicate"]).0, 2);
    assert_eq!(run(d.path(), &["lfun", "--q", "seven"]).0, 2);
}

#[test]
fn lfun_json_has_exact_coefficients() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = run(d.path(), &["--format", "json", "lfun", "--q", "7", "--a", "1"]);
    assert_eq!(code, 0, "{err}");
    let v = json(&d.path().join("lfun_q7_a1.json"));
    let c = v["coeffs"].as_array().unwrap();
    assert_eq!(c.len(), 25);
    assert_eq!(c[1], "-42");
    assert_eq!(c[24], "191581231380566414401");
}

#[test]
fn csv_headers() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["angles", "--q", "7", "--a", "2"]).0, 0);
    assert_eq!(run(d.path(), &["sha", "--q", "7", "--a", "1"]).0, 0);
    let first = |f: &str| std::fs::read_to_string(d.path().join(f)).unwrap().lines().next().unwrap().to_owned();
    assert_eq!(first("angles_q7_a2.csv"), "beta,theta,size");
    assert!(first("sha_q7_a1_candidates.csv").starts_with("c_inf,"));
}

#[test]
fn discrepancy_emits_bound_ratio() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, err) = run(d.path(), &["discrepancy", "--q", "7", "--a", "3"]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(d.path().join("discrepancy_q7_a3.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "a,places,discrepancy,bound_ratio,weyl1,weyl2");
    assert_eq!(lines.count(), 3);
    let r = json(&d.path().join("discrepancy_q7_a3_report.json"));
    assert_eq!(r["result"]["rows"].as_array().unwrap().len(), 3);
}
