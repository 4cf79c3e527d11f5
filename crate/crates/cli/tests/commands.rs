use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn actkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actkit"))
        .args(args)
        .env_remove("ACTKIT_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_b2() {
    let out = actkit(&["classify", "--monoid", path(&data("b2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let props = &v["properties"];
    assert_eq!(props["commutative"], true);
    assert_eq!(props["right_reversible"], true);
    assert_eq!(props["left_zero_count"], 1);
    assert_eq!(v["k"], 4);
    assert_eq!(v["act_size_bound"], 3);
    // B2 has three right acts of size 3 up to iso, one of them not (P)
    let three = &v["act_stats"][2];
    assert_eq!(three["acts"], 3);
    assert_eq!(three["condition_p"], 2);
    assert_eq!(three["strongly_flat"], 2);
}

#[test]
fn output_is_deterministic() {
    let run = || actkit(&["morphism-check", "--morphism", path(&data("fixed_point_inclusion.json"))]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn verify_suite_reports_and_exits_zero() {
    let out = actkit(&["verify", "lemma-renshaw", "--max-order", "3", "--max-size", "4", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["all_passed"], true);
    let s = &v["suites"][0];
    assert_eq!(s["suite"], "lemma-renshaw");
    assert_eq!(s["criterion"], 2);
    assert_eq!(s["violations"], 0);
    assert!(s["checked"].as_u64().unwrap() > 0);
    assert_eq!(s["seed"], 20140501);
    assert_eq!(s["bounds"]["k"], 3);
    assert!(s["version"].is_string());
}

#[test]
fn unknown_suite_is_an_input_error() {
    let out = actkit(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pushout_writes_square_and_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("out.dot");
    let out = actkit(&["pushout", "--span", path(&data("span.json")), "--emit-dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["apex"]["size"], 3);
    assert_eq!(v["universal_property_verified"], true);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
}

#[test]
fn schema_error_names_the_cell() {
    let out = actkit(&["act-check", "--act", path(&data("bad_act.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"], "schema");
    assert_eq!(diag["path"], "$.action[0][1]");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = actkit(&["act-check", "--act", "/nonexistent/act.json"]);
    assert_eq!(out.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(diag["message"].as_str().unwrap().contains("nonexistent"));
}

#[test]
fn zero_bound_is_rejected() {
    let out = actkit(&["classify", "--monoid", path(&data("b2.json")), "--k", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn closure_exit_codes() {
    let gens = data("generators.json");
    let done = actkit(&["closure", "--generators", path(&gens), "--max-size", "3", "--max-steps", "4"]);
    assert_eq!(done.status.code(), Some(0));
    let v = stdout_json(&done);
    assert_eq!(v["partial"], false);
    assert_eq!(v["arrows"].as_array().unwrap().len(), 7);

    let cut = actkit(&["closure", "--generators", path(&gens), "--max-size", "3", "--max-steps", "1"]);
    assert_eq!(cut.status.code(), Some(2));
    assert_eq!(stdout_json(&cut)["partial"], true);
}

#[test]
fn closure_is_independent_of_jobs() {
    let gens = data("generators.json");
    let run = |jobs: &str| {
        actkit(&["closure", "--generators", path(&gens), "--max-size", "3", "--max-steps", "4", "--jobs", jobs]).stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn census_resume_matches_a_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.jsonl");
    let out = actkit(&["census", "--max-order", "3", "--out", full.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&full).unwrap();
    assert_eq!(text.lines().count(), 10);

    let part = dir.path().join("part.jsonl");
    let head: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    std::fs::write(&part, head).unwrap();
    let out = actkit(&["census", "--max-order", "3", "--resume", part.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&part).unwrap(), text);
}

#[test]
fn tensor_with_the_regular_left_act() {
    let out = actkit(&["tensor", "--right", path(&data("b2_sum.json")), "--left", path(&data("b2_left_regular.json"))]);
    assert_eq!(out.status.code(), Some(0));
    // A ⊗ S ≅ A
    assert_eq!(stdout_json(&out)["size"], 3);
}

#[test]
fn precover_refutes_within_the_bound() {
    let out = actkit(&["precover", "--act", path(&data("z2_two_points.json")), "--class", "strongly-flat", "--max-size", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "refuted");
    assert_eq!(v["candidates_examined"], 2);
}

#[test]
fn table_format_renders() {
    let out = actkit(&["act-check", "--act", path(&data("b2_sum.json")), "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("strongly_flat: false"));
    assert!(text.contains("condition_e: true"));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.json");
    let out = actkit(&["act-check", "--act", path(&data("b2_regular.json")), "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["flatness"]["strongly_flat"], true);
}
