use std::process::Command;

fn bergman() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
}

#[test]
fn spaces_suite_passes_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let status = bergman()
        .args(["verify", "spaces", "--csv"])
        .arg(&csv)
        .arg("--json")
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("experiment,params,lhs,lhs_se,rhs,rhs_se,ratio,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["all_pass"], true);
}

#[test]
fn project_reproduces_a_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    std::fs::write(
        &input,
        r#"{"terms":[{"kind":"monomial","multi_index":[1,1]},{"kind":"monomial","coeff_re":2,"multi_index":[0,0]}]}"#,
    )
    .unwrap();
    let out = bergman()
        .args(["project", "--input"])
        .arg(&input)
        .args(["--alpha", "1", "--at", "0.1,0.2+0.1i", "--samples", "50000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("projection.reproduces"));
}

#[test]
fn bad_input_exits_with_two() {
    let out = bergman().args(["project", "--input", "/nonexistent.json", "--at", "0.1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bergman().args(["equiv", "--functional", "wavelet"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    let out = bergman().args(["verify", "spaces", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_rows_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"windows": {"sweep": 1.0}}"#).unwrap();
    let out = bergman()
        .args(["weak-type", "--n", "1", "--trials", "2000", "--nodes", "200", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
