use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn graceful(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graceful")).args(args).current_dir(dir).output().expect("spawn")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is json")
}

#[test]
fn verify_accepts_the_three_vertex_path() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p3.txt"), "3\n1 2\n2 3\n").unwrap();
    fs::write(d.path().join("l.json"), r#"{"n":3,"n_tilde":3,"labels":[1,3,2]}"#).unwrap();
    let o = graceful(&["verify", "--tree", "p3.txt", "--labels", "l.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["passed"], true);
}

#[test]
fn verify_rejects_repeated_differences() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p3.txt"), "3\n1 2\n2 3\n").unwrap();
    fs::write(d.path().join("l.json"), r#"{"n":3,"n_tilde":3,"labels":[1,2,3]}"#).unwrap();
    let o = graceful(&["verify", "--tree", "p3.txt", "--labels", "l.json"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["passed"], false);
}

#[test]
fn pack_single_edge_decomposes_k3() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("k2.txt"), "2\n1 2\n").unwrap();
    fs::write(d.path().join("l.json"), r#"{"n":2,"n_tilde":2,"labels":[1,2]}"#).unwrap();
    let o = graceful(&["pack", "--tree", "k2.txt", "--labels", "l.json", "--out", "pack.txt"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["decomposition"], true);
    let text = fs::read_to_string(d.path().join("pack.txt")).unwrap();
    assert_eq!(text.lines().next(), Some("host 3"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn malformed_tree_reports_parse_error() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("bad.txt"), "3\n1 2\nx 3\n").unwrap();
    let o = graceful(&["exact", "--tree", "bad.txt"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "parse");
    assert!(e["message"].as_str().unwrap().contains("line 3"), "{e}");
}

#[test]
fn exact_counts_small_star() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("s.txt"), "4\n1 2\n1 3\n1 4\n").unwrap();
    let o = graceful(&["exact", "--tree", "s.txt", "--count"], d.path());
    assert_eq!(o.status.code(), Some(0));
    // centre labelled 1 or 4, leaves in any order
    assert_eq!(stdout_json(&o)["count"], 12);
}

#[test]
fn label_then_verify_and_repeat_byte_identically() {
    let d = tempfile::tempdir().unwrap();
    let g = graceful(&["generate", "--n", "300", "--seed", "5", "--out", "t.txt"], d.path());
    assert_eq!(g.status.code(), Some(0));
    let args = ["label", "--tree", "t.txt", "--gamma", "1", "--m", "32", "--ell", "128", "--seed", "0"];
    let mut outs = Vec::new();
    for k in 0..2 {
        let out = format!("l{k}.json");
        let trace = format!("tr{k}.csv");
        let o = graceful(&[&args[..], &["--out", &out, "--trace", &trace]].concat(), d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push((fs::read(d.path().join(&out)).unwrap(), fs::read(d.path().join(&trace)).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let v = graceful(&["verify", "--tree", "t.txt", "--labels", "l0.json"], d.path());
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn exhausted_retries_exit_two_with_histogram() {
    let d = tempfile::tempdir().unwrap();
    graceful(&["generate", "--n", "300", "--seed", "5", "--out", "t.txt"], d.path());
    let o = graceful(
        &["label", "--tree", "t.txt", "--gamma", "1", "--m", "32", "--ell", "128", "--seed", "2"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "labelling_failed");
    let total: u64 = e["failure_histogram"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, e["attempts"].as_u64().unwrap());
}

#[test]
fn invalid_parameters_exit_one() {
    let d = tempfile::tempdir().unwrap();
    graceful(&["generate", "--n", "300", "--seed", "5", "--out", "t.txt"], d.path());
    let o = graceful(
        &["label", "--tree", "t.txt", "--gamma", "1", "--m", "32", "--ell", "100", "--seed", "0"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "divisibility");
}

#[test]
fn experiment_with_zero_trials_flags_undefined_rate() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("cfg.json"),
        r#"{"n":[200],"gamma":"1","m":8,"ell":32,"trials":0,"seed":1}"#,
    )
    .unwrap();
    let o = graceful(&["experiment", "--config", "cfg.json", "--out-dir", "out"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)[0]["rate_undefined"], true);
    for f in ["records.csv", "summary.json", "timings.csv"] {
        assert!(d.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn unknown_config_key_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("cfg.json"),
        r#"{"n":[200],"gamma":"1","m":8,"ell":32,"trials":1,"seed":1,"colour":"blue"}"#,
    )
    .unwrap();
    let o = graceful(&["experiment", "--config", "cfg.json"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "config");
}
