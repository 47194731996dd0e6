use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn polyapprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyapprox")).args(args).output().expect("binary runs")
}

fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn malformed_scenario_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"name\": \"bad\",\n  \"operation\": \"volumes\",,\n}").unwrap();
    let out = polyapprox(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn invalid_parameter_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eps.json");
    fs::write(
        &path,
        r#"{"name": "e", "operation": "approx-eps", "body": {"dim": 3, "variant": "ball", "radius": 1}, "params": {"eps": [2]}, "seed": 1}"#,
    )
    .unwrap();
    let out = polyapprox(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.eps[0]"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&polyapprox(&[])), 2);
    assert_eq!(code(&polyapprox(&["constants"])), 2);
    assert_eq!(code(&polyapprox(&["constants", "--dim", "9"])), 2);
}

#[test]
fn empty_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyapprox(&["suite", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 scenarios: 0 passed"));
}

#[test]
fn tightened_bound_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(manifest_path("tests/fixtures/forced-failure.json"), dir.path().join("forced-failure.json")).unwrap();
    fs::copy(manifest_path("scenarios/volumes-ball-d3.json"), dir.path().join("volumes-ball-d3.json")).unwrap();
    let out = polyapprox(&["suite", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL forced-failure"), "{stdout}");
    assert!(stdout.contains("2 scenarios: 1 passed, 1 failed"), "{stdout}");
}

#[test]
fn constants_table() {
    let out = polyapprox(&["constants", "--dim", "3"]);
    assert_eq!(code(&out), 0);
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let c12bis = table["c12bis"].as_f64().unwrap();
    assert!((c12bis - 3f64.sqrt() * 64.0 / std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(table["j0"], 1);
}

#[test]
fn reports_are_written_and_reproducible() {
    let scenario = manifest_path("scenarios/volumes-box-123.json");
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = polyapprox(&["run", scenario.to_str().unwrap(), "--seed", "17", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(dir.path().join("volumes-box-123.csv")).unwrap();
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("volumes-box-123.json")).unwrap()).unwrap();
        assert_eq!(report["seed"], 17);
        assert_eq!(report["passed"], true);
        csvs.push(csv);
    }
    assert!(csvs[0].starts_with("quantity,value,lower,upper,pass,stderr,seed\n"));
    assert!(csvs[0].lines().skip(1).all(|l| l.ends_with(",17")));
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn bundled_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyapprox(&["suite", manifest_path("scenarios").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.contains("12 scenarios: 12 passed, 0 failed, 0 invalid"), "{stdout}");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], 12);
    assert!(dir.path().join("ball-d3-thm2.csv").exists());
}
