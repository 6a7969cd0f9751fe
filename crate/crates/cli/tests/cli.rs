//! End-to-end runs of the `mqsp` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PROTOCOL: &str = r#"{"s":[1,0,1],"phases":[
    {"kind":"exact","re":"3/5","im":"4/5"},
    {"kind":"exact","re":"1","im":"0"},
    {"kind":"exact","re":"0","im":"1"},
    {"kind":"exact","re":"5/13","im":"-12/13"}]}"#;

fn mqsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqsp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn built_pair(dir: &TempDir) {
    std::fs::write(dir.path().join("prot.json"), PROTOCOL).unwrap();
    let out = mqsp(dir.path(), &["build", "-p", "prot.json", "-o", "pair.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn build_then_check_revised_passes() {
    let dir = TempDir::new().unwrap();
    built_pair(&dir);
    let out = mqsp(dir.path(), &["check", "pair.json", "--variant", "revised"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    for key in ["i", "ii", "iii", "iv", "v"] {
        assert_ne!(report[key]["verdict"], "fail", "{key}");
    }
}

#[test]
fn check_original_on_odd_n_fails_with_parity_witness() {
    let dir = TempDir::new().unwrap();
    built_pair(&dir);
    let out = mqsp(dir.path(), &["check", "pair.json", "--variant", "original"]);
    assert_eq!(code(&out), 1);
    let report = stdout_json(&out);
    assert_eq!(report["ii"]["verdict"], "fail");
    assert_eq!(report["ii"]["witness"]["kind"], "parity");
}

#[test]
fn decompose_rebuilds_the_pair() {
    let dir = TempDir::new().unwrap();
    built_pair(&dir);
    let out = mqsp(
        dir.path(),
        &["decompose", "pair.json", "-o", "recovered.json"],
    );
    assert_eq!(code(&out), 0);
    let out = mqsp(
        dir.path(),
        &["build", "-p", "recovered.json", "-o", "rebuilt.json"],
    );
    assert_eq!(code(&out), 0);
    let read = |f: &str| -> Value {
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(f)).unwrap()).unwrap()
    };
    assert_eq!(read("pair.json"), read("rebuilt.json"));
}

#[test]
fn demo_contradiction_zeroes_everything_but_the_constant() {
    let dir = TempDir::new().unwrap();
    let out = mqsp(dir.path(), &["demo-contradiction", "-n", "4", "-m", "2"]);
    assert_eq!(code(&out), 0);
    let trace = stdout_json(&out);
    assert_eq!(trace["only_constant_survives"], true);
    assert_eq!(trace["steps"][0]["lag"], serde_json::json!([4, 4]));
    let out = mqsp(dir.path(), &["demo-contradiction", "-n", "1", "-m", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn counterexample_lift_and_decompose_chain() {
    let dir = TempDir::new().unwrap();
    let out = mqsp(
        dir.path(),
        &[
            "find-counterexample",
            "-n",
            "4",
            "-m",
            "2",
            "--seed",
            "1",
            "-o",
            "base.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = mqsp(dir.path(), &["check", "base.json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["v"]["verdict"], "fail");

    let out = mqsp(
        dir.path(),
        &[
            "lift",
            "base.json",
            "--phase-re",
            "3/5",
            "--phase-im",
            "4/5",
            "-o",
            "lifted.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let out = mqsp(dir.path(), &["check", "lifted.json"]);
    assert_eq!(code(&out), 0);
    let out = mqsp(dir.path(), &["decompose", "lifted.json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["outcome"], "not_decomposable");
}

#[test]
fn search_with_no_budget_reports_not_found() {
    let dir = TempDir::new().unwrap();
    let out = mqsp(
        dir.path(),
        &["find-counterexample", "--seed", "1", "--budget", "0"],
    );
    assert_eq!(code(&out), 1);
    let out = mqsp(
        dir.path(),
        &["find-counterexample", "-n", "1", "-m", "1", "--seed", "1"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn insufficiency_reports_a_counterexample() {
    let dir = TempDir::new().unwrap();
    let out = mqsp(
        dir.path(),
        &["insufficiency", "--seed", "0", "-o", "report.json"],
    );
    assert_eq!(code(&out), 0);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "counterexample");
    assert_eq!(
        report["findings"]["top_peelable_axes"],
        serde_json::json!(["A"])
    );
}

#[test]
fn randomized_commands_require_a_seed() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mqsp(dir.path(), &["find-counterexample"])), 2);
    assert_eq!(code(&mqsp(dir.path(), &["insufficiency"])), 2);
}

#[test]
fn sample_emits_csv() {
    let dir = TempDir::new().unwrap();
    built_pair(&dir);
    let out = mqsp(dir.path(), &["sample", "pair.json", "--resolution", "8"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_a,theta_b,abs_P2,abs_Q2,sum"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| (r[4] - 1.0).abs() < 1e-9));
    assert_eq!(
        code(&mqsp(
            dir.path(),
            &["sample", "pair.json", "--resolution", "1"]
        )),
        2
    );
}

#[test]
fn malformed_input_points_at_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = r#"{"p":{"backend":"exact","entries":[{"j":0,"k":0,"re":"1","im":"0"},{"j":1,"k":0,"re":"1/0","im":"0"}]},
                  "q":{"backend":"exact","entries":[]},"n":1,"m":1}"#;
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let out = mqsp(dir.path(), &["check", "bad.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("p.entries[1].re"));

    std::fs::write(
        dir.path().join("trunc.json"),
        r#"{"p": {"backend": "exact""#,
    )
    .unwrap();
    assert_eq!(code(&mqsp(dir.path(), &["check", "trunc.json"])), 2);
    assert_eq!(code(&mqsp(dir.path(), &["check", "missing.json"])), 2);
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&mqsp(dir.path(), &["check", "x.json", "--frobnicate"])),
        2
    );
    assert_eq!(code(&mqsp(dir.path(), &[])), 2);
}

#[test]
fn float_mode_builds_angle_protocols() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("prot.json"),
        r#"{"s":[0,1],"phases":[{"kind":"angle","radians":0.25},{"kind":"exact","re":"0","im":"1"},{"kind":"angle","radians":-1.0}]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&mqsp(
            dir.path(),
            &["build", "-p", "prot.json", "--mode", "exact"]
        )),
        2
    );
    let out = mqsp(dir.path(), &["build", "-p", "prot.json", "-o", "pair.json"]);
    assert_eq!(code(&out), 0);
    let pair: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pair.json")).unwrap())
            .unwrap();
    assert_eq!(pair["p"]["backend"], "float");
    assert_eq!(code(&mqsp(dir.path(), &["check", "pair.json"])), 0);
    assert_eq!(
        code(&mqsp(
            dir.path(),
            &["check", "pair.json", "--mode", "exact"]
        )),
        2
    );
    assert_eq!(code(&mqsp(dir.path(), &["decompose", "pair.json"])), 0);
}

#[test]
fn irrational_roots_fall_back_to_float() {
    let dir = TempDir::new().unwrap();
    // P = (3+4i)/5 (a + 1/a)/2, Q = (a - 1/a)/2 needs e^{i phi} = (2+i)/sqrt(5)
    std::fs::write(
        dir.path().join("pair.json"),
        r#"{"p":{"backend":"exact","entries":[{"j":-1,"k":0,"re":"3/10","im":"2/5"},{"j":1,"k":0,"re":"3/10","im":"2/5"}]},
            "q":{"backend":"exact","entries":[{"j":-1,"k":0,"re":"-1/2","im":"0"},{"j":1,"k":0,"re":"1/2","im":"0"}]},
            "n":1,"m":1}"#,
    )
    .unwrap();
    assert_eq!(code(&mqsp(dir.path(), &["check", "pair.json"])), 0);
    let out = mqsp(dir.path(), &["decompose", "pair.json"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("float"));
    assert_eq!(
        code(&mqsp(
            dir.path(),
            &["decompose", "pair.json", "--mode", "exact"]
        )),
        2
    );
}
