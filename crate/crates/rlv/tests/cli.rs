mod common;

use std::process::Output;

use common::*;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    rlv().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(name: &str) -> String {
    model_path(name).display().to_string()
}

#[test]
fn check_valid_exit_codes() {
    let sum = path("sum.rlm");
    let o = run(&["check-valid", "--model", &sum, "--formula", SUM_GOAL]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("check-valid: valid"));
    let o = run(&[
        "check-valid",
        "--model",
        &sum,
        "--formula",
        "(c = c0) =>> (c = c2 && s = m*m)",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("[path c0["));
    let o = run(&["check-valid", "--model", &sum, "--formula", "(c = c9) =>> true"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn json_out_matches_the_text_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "check-valid",
        "--model",
        &path("gcd.rlm"),
        "--formula",
        GCD_GOAL,
        "--json-out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["command"], "check-valid");
    assert_eq!(v["status"], "valid");
    assert_eq!(v["stats"]["states"], 85683);
    assert!(v["stats"]["wall_ms"].is_u64());
}

#[test]
fn certify_emits_proofs_that_check() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.json");
    let tree = dir.path().join("t.json");
    let sum = path("sum.rlm");
    let sel = ["--select-arrows", "1", "--select-nodes", "c1"];
    let mut args = vec![
        "certify",
        "--model",
        &sum,
        "--formula",
        SUM_LOOP_FORMULA,
        "--invariant",
        SUM_LOOP_Q,
    ];
    args.extend(sel);
    args.extend([
        "--emit-script",
        script.to_str().unwrap(),
        "--emit-tree",
        tree.to_str().unwrap(),
    ]);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let mut a = vec!["check-script", "--model", &sum, "--script", script.to_str().unwrap()];
    a.extend(sel);
    assert_eq!(code(&run(&a)), 0);
    let mut a = vec!["check-tree", "--model", &sum, "--tree", tree.to_str().unwrap()];
    a.extend(sel);
    assert_eq!(code(&run(&a)), 0);
    // state ids refer to the component; on the whole machine they name other states
    let o = run(&["check-tree", "--model", &sum, "--tree", tree.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn mutated_invariant_is_rejected_with_a_witness() {
    let q = SUM_LOOP_Q.replace("i < m", "i <= m");
    let sum = path("sum.rlm");
    let o = run(&[
        "certify",
        "--model",
        &sum,
        "--select-arrows",
        "1",
        "--select-nodes",
        "c1",
        "--formula",
        SUM_LOOP_FORMULA,
        "--invariant",
        &q,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("q ⊓ • ⊑ ⊥: fails [witness c1["), "{}", stdout(&o));
}

#[test]
fn synth_q_round_trips_through_certify() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    let gcd = path("gcd.rlm");
    let o = run(&[
        "synth-q",
        "--model",
        &gcd,
        "--formula",
        GCD_GOAL,
        "--emit",
        q.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let inv = format!("@{}", q.display());
    let o = run(&["certify", "--model", &gcd, "--formula", GCD_GOAL, "--invariant", &inv]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn autoprove_proves_or_refutes() {
    let sum = path("sum.rlm");
    let o = run(&["autoprove", "--model", &sum, "--formula", SUM_GOAL]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("cycle = "));
    let o = run(&[
        "autoprove",
        "--model",
        &sum,
        "--formula",
        "(c = c0) =>> (c = c2 && s = m*m)",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("final state outside r"));
}

#[test]
fn gcd_bundle_checks() {
    let o = run(&[
        "check-tree",
        "--model",
        &path("gcd.rlm"),
        "--tree",
        &path("gcd_bundle.json"),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("main: proof accepted"));
}

#[test]
fn gcd_bundle_under_the_literal_reading_is_refused() {
    let text = std::fs::read_to_string(model_path("gcd_bundle.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.json");
    std::fs::write(&p, text.replace("exit-through-finals", "literal")).unwrap();
    let o = run(&["check-tree", "--model", &path("gcd.rlm"), "--tree", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("component S1: condition (b)"), "{}", stdout(&o));
}

#[test]
fn broken_bundle_leaf_is_located() {
    let text = std::fs::read_to_string(model_path("gcd_bundle.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.json");
    // the x = y branch of the main tree loses its step
    let broken = text.replacen("\"label\": \"x = y\",", "\"label\": \"x = y\", \"__\": 0,", 1);
    std::fs::write(&p, &broken).unwrap();
    let o = run(&["check-tree", "--model", &path("gcd.rlm"), "--tree", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "unknown keys are input errors");

    let mut v: Value = serde_json::from_str(&text).unwrap();
    let x_eq_y = &mut v["tree"]["children"][1]["children"][0]["children"][1]["children"][0];
    assert_eq!(x_eq_y["label"], "x = y");
    x_eq_y["rule"] = "Trv".into();
    x_eq_y["children"] = Value::Array(vec![]);
    std::fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["check-tree", "--model", &path("gcd.rlm"), "--tree", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(
        stdout(&o).contains("main: root.1.0.1.0 (x = y): [Trv]"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn component_verdicts_per_reading() {
    let gcd = path("gcd.rlm");
    let base = [
        "component",
        "--model",
        &gcd,
        "--select-arrows",
        "1,3",
        "--select-nodes",
        "c1,c2",
    ];
    let o = run(&base);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("condition (b): 13182 violation(s)"));
    let mut a = base.to_vec();
    a.extend(["--reading", "exit-through-finals"]);
    let o = run(&a);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("component_under_literal = false"));
    let o = run(&["component", "--model", &gcd]);
    assert_eq!(code(&o), 2);
}

#[test]
fn expand_reports_sizes_and_warnings() {
    let o = run(&["expand", "--model", &path("sum.rlm")]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("states = 26532"));
    assert!(s.contains("range_warnings = 220"));
    assert!(s.contains("leaves its range"));
    let o = run(&["expand", "--model", &path("gcd.rlm"), "--max-states", "1000"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn explicit_json_systems() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(
        &m,
        r#"{"states": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"], ["c", "c"]]}"#,
    )
    .unwrap();
    let m = m.to_str().unwrap();
    // a -> b -> c -> c ...: the only path from a is infinite
    let o = run(&[
        "check-valid",
        "--model",
        m,
        "--formula",
        r#"{"lhs": {"states": [0]}, "rhs": {"states": []}}"#,
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["check-valid", "--model", m, "--formula", "c = c0 =>> true"]);
    assert_eq!(code(&o), 2);
    let o = run(&[
        "check-valid",
        "--model",
        m,
        "--formula",
        r#"{"lhs": {"states": [7]}, "rhs": "true"}"#,
    ]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("out of range"));
}

#[test]
fn fuzz_is_clean_and_catches_an_injected_fault() {
    let o = run(&["fuzz", "--count", "200", "--max-states", "8", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("violations = 0"));

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&[
        "fuzz",
        "--count",
        "20",
        "--seed",
        "3",
        "--inject-fault",
        "flip-autoprove",
        "--dump-dir",
        d,
    ]);
    assert_eq!(code(&o), 1);
    let dumps: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dumps.len(), 20);
    for p in &dumps {
        let o = run(&["fuzz", "--replay", p.to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{} did not re-fail", p.display());
        assert!(stdout(&o).contains("autoprove says"));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["check-valid"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}
