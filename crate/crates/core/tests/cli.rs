//! End-to-end runs of the `qhds` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qhds::cli::Report;
use tempfile::TempDir;

const S1: &str = r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":"1"}]}"#;
const S2: &str = r#"{"n":2,"a":[{"i":1,"j":1,"k":1,"value":1},{"i":2,"j":2,"k":2,"value":1}]}"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn qhds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhds")).args(args).output().unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = qhds(args);
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let s1 = write(&dir, "s1.json", S1);
    let s2 = write(&dir, "s2.json", S2);
    assert_eq!(run(&["point", s(&s1)]).0, 0);
    assert_eq!(run(&["contact", s(&s1), "--example", "3.4", "--i", "1", "--flow", "--invariants"]).0, 0);
    assert_eq!(run(&["contact", s(&s1), "--example", "3.7", "--flow"]).0, 1);
    assert_eq!(run(&["contact", s(&s2), "--example", "3.8", "--flow"]).0, 1);
    assert_eq!(run(&["table", s(&s1), "--split", "--T", "1", "--K", "1"]).0, 0);
    assert_eq!(run(&["point", s(&dir.path().join("missing.json"))]).0, 2);
    assert_eq!(run(&["contact", s(&s1), "--example", "3.9"]).0, 2);
    assert_eq!(run(&["contact", s(&s1), "--T", "1", "--K", "1", "--K", "2"]).0, 2);
    assert_eq!(run(&["point", s(&s1), "--step", "0"]).0, 2);
    assert_eq!(run(&["bogus"]).0, 2);
}

#[test]
fn input_diagnostics_name_the_entry() {
    let dir = TempDir::new().unwrap();
    let bad =
        write(&dir, "bad.json", r#"{"n":2,"a":[{"i":1,"j":1,"k":1,"value":"1"},{"i":1,"j":3,"k":1,"value":"1"}]}"#);
    let (code, _, err) = run(&["point", s(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("entry 1 (i=1, j=3, k=1)"), "{err}");
    let float = write(&dir, "float.json", r#"{"n":1,"a":[{"i":1,"j":1,"k":1,"value":0.5}]}"#);
    assert!(run(&["point", s(&float)]).2.contains("float"));
}

#[test]
fn point_report_matches_golden_file() {
    let dir = TempDir::new().unwrap();
    let s1 = write(&dir, "s1.json", S1);
    let (code, out, _) = run(&["point", s(&s1), "--mode", "both", "--format", "json"]);
    assert_eq!(code, 0);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/point_s1_both.json");
    if std::env::var_os("QHDS_UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &out).unwrap();
    }
    assert_eq!(out, std::fs::read_to_string(&golden).unwrap());
    let report: Report = serde_json::from_str(&out).unwrap();
    assert_eq!(report.to_json(), out);
}

#[test]
fn json_reports_repeat_exactly() {
    let dir = TempDir::new().unwrap();
    let s1 = write(&dir, "s1.json", S1);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let (code, _, _) = run(&[
            "contact",
            s(&s1),
            "--example",
            "3.6",
            "--c",
            "1/2",
            "--flow",
            "--invariants",
            "--seed",
            "7",
            "--out",
            s(out),
        ]);
        assert_eq!(code, 1);
    }
    let (ja, jb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ja, jb);
    let report: Report = serde_json::from_str(&ja).unwrap();
    assert_eq!(report.config.seed, 7);
    assert_eq!(report.to_json(), ja);
}

#[test]
fn text_output_shows_findings() {
    let dir = TempDir::new().unwrap();
    let s1 = write(&dir, "s1.json", S1);
    let (_, out, _) = run(&["point", s(&s1), "--mode", "both"]);
    assert!(out.contains("point symmetries (strict, degree 2): dimension 1"), "{out}");
    assert!(out.contains("point symmetries (on-shell, degree 2): dimension 4"), "{out}");
    let (_, out, _) = run(&["contact", s(&s1), "--example", "3.7", "--flow"]);
    assert!(out.contains("[printed]: FAIL") && out.contains("[corrected]: PASS"), "{out}");
    let (_, out, _) = run(&["table", s(&s1), "--split", "--T", "1", "--K", "1"]);
    assert!(out.contains("disagrees"), "{out}");
}
