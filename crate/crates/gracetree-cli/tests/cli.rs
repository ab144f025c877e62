use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    run_with_stdin(args, None)
}

fn run_with_stdin(args: &[&str], stdin: Option<&str>) -> (i32, Value) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gracetree"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(text) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
    }
    drop(child.stdin.take());
    let out = child.wait_with_output().unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    (out.status.code().unwrap(), report)
}

fn temp_file(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("gracetree-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn labels(report: &Value) -> Vec<u64> {
    serde_json::from_value(report["payload"]["labels"].clone()).unwrap()
}

#[test]
fn label_auto_tags_the_theorem() {
    let (code, r) = run(&["label", "--auto", "(((()))((()))((())))"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["payload"]["strategy"], "4.1");
    let (code, r) = run(&["label", "(((())(())(()(()))))"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["strategy"], "search");
    assert_eq!(r["payload"]["classification"]["is_graceful"], true);
    let banana = "n=9\n0 1\n1 2\n2 3\n0 4\n4 5\n5 6\n5 7\n5 8";
    let (code, r) = run(&["label", banana]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["strategy"], "gen-banana");
    let l = labels(&r);
    let (code, r) = run(&["verify", banana, "--labels", &format!("{l:?}")]);
    assert_eq!(code, 0, "{r}");
}

#[test]
fn label_by_named_theorem() {
    let spider = "spider:3,3,3";
    let (code, r) = run(&["label", "--theorem", "4.1", spider]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(labels(&r)[0], 0);
    let (code, r) = run(&["label", "--theorem", "4.2", "path:3"]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "rejected");
    let (code, r) = run(&["label", "--theorem", "four-even", "path:3"]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "refused");
    assert!(r["diagnostics"][0]
        .as_str()
        .unwrap()
        .contains("conjectured, not implemented"));
}

#[test]
fn label_classic_graphs_and_leaf_attachment() {
    let (code, r) = run(&["label", "cycle:8"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["alpha_index"], 3);
    let (code, _) = run(&["label", "cycle:6"]);
    assert_eq!(code, 1);
    let (code, r) = run(&["label", "--attach-leaves", "2", "path:4"]);
    assert_eq!(code, 0, "{r}");
    let (code, r) = run(&["label", "--labeling-function", "1", "star:3"]);
    assert_eq!(code, 0);
    assert!(r["payload"]["rational_labels"][2]
        .as_str()
        .unwrap()
        .contains('/'));
}

#[test]
fn verify_rejects_bad_labelings() {
    let (code, r) = run(&["verify", "path:4", "--labels", "0 4 1 3 2", "--alpha"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["classification"]["alpha_index"], 2);
    let (code, r) = run(&["verify", "path:4", "--labels", "0 1 2 3 4"]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "rejected");
    let (code, _) = run(&["verify", "complete:4", "--labels", "[0,1,4,6]"]);
    assert_eq!(code, 0);
}

#[test]
fn decide_reports_plans_and_preconditions() {
    let (code, r) = run(&["decide", "((1,1,1),(3,1,1),(1))", "--brute", "200000"]);
    assert_eq!(code, 0, "{r}");
    assert!(r["payload"]["decision"]["sequence"].is_array());
    let (code, r) = run(&["decide", "--zeros", "((1,0,0),(1,0,0),(2))"]);
    assert_eq!(code, 1);
    assert!(r["diagnostics"][0]
        .as_str()
        .unwrap()
        .contains("more than one 0"));
    let (code, r) = run(&["decide", "(((2,1,1),(2,1,1),1),(2,1,1),1)"]);
    assert_eq!(code, 1);
    assert!(r["diagnostics"][0]
        .as_str()
        .unwrap()
        .contains("not decided"));
}

#[test]
fn replay_traces() {
    let good = temp_file(
        "good.json",
        r#"{"star":{"m":4,"transferable":4},"plan":[{"from":1,"to":2,"leftover":1},{"from":2,"to":3,"leftover":1}]}"#,
    );
    let (code, r) = run(&["replay", "--trace", &good]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["census"], serde_json::json!([1, 1, 2, 0]));
    let bad = temp_file(
        "bad.json",
        r#"{"star":{"m":4,"transferable":4},"plan":[{"from":1,"to":2,"leftover":1},{"from":3,"to":4,"leftover":1}]}"#,
    );
    let (code, r) = run(&["replay", "--trace", &bad]);
    assert_eq!(code, 1);
    assert!(
        r["diagnostics"][0].as_str().unwrap().contains("step 2"),
        "{r}"
    );
}

#[test]
fn search_with_pins_counts_and_caps() {
    let (code, r) = run(&["search", "--alpha", "--pin", "v=2:0", "path:4"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["found"], false);
    let (code, r) = run(&["search", "--count", "path:2"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["count"], 4);
    let (code, r) = run(&["search", "--max-vertices", "5", "path:9"]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "refused");
    let (_, r) = run(&["search", "cycle:5"]);
    assert_eq!(r["payload"]["found"], false);
}

#[test]
fn parse_errors_carry_positions() {
    let (code, r) = run_with_stdin(&["classify", "-"], Some("n=3\n0 1\n0 1\n"));
    assert_eq!(code, 1);
    let msg = r["diagnostics"][0].as_str().unwrap();
    assert!(msg.contains("line 3") && msg.contains("duplicate"), "{msg}");
    let (code, r) = run(&["classify", "n=4\\n0 1\\n2 3"]);
    assert_eq!(code, 1);
    assert!(r["diagnostics"][0].as_str().unwrap().contains("not a tree"));
    let (code, r) = run(&["classify", "graph\\nn=4\\n0 1\\n1 2\\n2 3\\n3 0"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["kind"], "graph");
}

#[test]
fn classify_and_decompose() {
    let (code, r) = run(&["classify", "spider:3,3,3"]);
    assert_eq!(code, 0);
    let theorems: Vec<String> = serde_json::from_value(r["payload"]["theorems"].clone()).unwrap();
    assert!(theorems.contains(&"4.1".to_string()));
    let (code, r) = run(&["decompose", "path:3"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["copies"].as_array().unwrap().len(), 7);
    let (code, _) = run(&["decompose", "path:3", "--labels", "0 1 2 3"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_verbs_fail_before_work() {
    let out = Command::new(env!("CARGO_BIN_EXE_gracetree"))
        .arg("paint")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
