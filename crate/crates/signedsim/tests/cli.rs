//! End-to-end tests of the `signedsim` binary: exit-code taxonomy, output
//! formats, and byte-level determinism of stochastic commands.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signedsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signedsim"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

const BELL_JSON: &str = r#"{
    "parties": ["Alice", "Bob"],
    "measurements": [["a", "a'"], ["b", "b'"]],
    "outcomes": ["0", "1"],
    "rows": {
        "a,b": ["1/2", "0", "0", "1/2"],
        "a',b": ["3/8", "1/8", "1/8", "3/8"],
        "a,b'": ["3/8", "1/8", "1/8", "3/8"],
        "a',b'": ["1/8", "3/8", "3/8", "1/8"]
    }
}"#;

const SIGNALING_JSON: &str = r#"{
    "parties": ["Alice", "Bob"],
    "measurements": [["a", "a'"], ["b", "b'"]],
    "outcomes": ["0", "1"],
    "rows": {
        "a,b": ["0.6", "0", "0", "0.4"],
        "a',b": ["3/8", "1/8", "1/8", "3/8"],
        "a,b'": ["3/8", "1/8", "1/8", "3/8"],
        "a',b'": ["1/8", "3/8", "3/8", "1/8"]
    }
}"#;

fn write_model(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bell_demo_json_is_byte_identical_across_runs() {
    let a = run(&["bell-demo", "--n", "100"]);
    let b = run(&["bell-demo", "--n", "100"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"schema_version\": 1"));
    assert!(text.contains("\"reversal\": true"));
}

#[test]
fn bell_demo_csv_has_documented_header() {
    let out = run(&["bell-demo", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "schema_version,command,n,total_weight,roundtrip_max_error,deviation_image_error,d_coarse,d_fine,reversal,p_coarse,p_fine\n"
    ));
}

#[test]
fn realize_reads_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "bell.json", BELL_JSON);
    let out = run(&["realize", "--model", &path]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON report");
    let weight = report["results"]["total_weight"].as_f64().unwrap();
    assert!(weight <= 1.25 + 1e-7, "weight {weight}");
    assert!(report["results"]["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn malformed_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "bad.json", "{ not json");
    let out = run(&["realize", "--model", &path]);
    assert_eq!(out.status.code(), Some(3));
    // missing file is a parse-stage failure too
    let out = run(&["realize", "--model", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn signaling_model_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "signal.json", SIGNALING_JSON);
    let out = run(&["realize", "--model", &path]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn infeasible_target_exits_5() {
    let out = run(&[
        "reversal-search",
        "--context",
        "a,b",
        "--target",
        "0.5,0.5,0,0",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn invalid_grid_exits_6() {
    let out = run(&[
        "near-uniform",
        "--m",
        "4",
        "--target",
        "0,0.4,0.3,0.2,0.1",
        "--epsilon-grid",
        "0.9",
    ]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn missing_required_seed_exits_6() {
    let out = run(&[
        "mc-sanov", "--dist", "0.5,0.5", "--target", "0.7,0.3", "--delta", "0.05", "--n-grid",
        "50", "--trials", "100",
    ]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn oracle_too_large_without_trials_exits_7() {
    let out = run(&[
        "mc-sanov",
        "--dist",
        "0.2,0.2,0.2,0.2,0.2",
        "--target",
        "0.2,0.2,0.2,0.2,0.2",
        "--delta",
        "0.1",
        "--n-grid",
        "100000",
        "--trials",
        "0",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn mc_sanov_outputs_are_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    let args = |path: &Path| {
        vec![
            "mc-sanov".to_string(),
            "--dist".into(),
            "0.5,0.5".into(),
            "--target".into(),
            "0.7,0.3".into(),
            "--delta".into(),
            "0.05".into(),
            "--n-grid".into(),
            "50,100".into(),
            "--trials".into(),
            "20000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            path.to_string_lossy().into_owned(),
        ]
    };
    let a_args = args(&out_a);
    let b_args = args(&out_b);
    let status_a = run_with_threads(&a_args.iter().map(String::as_str).collect::<Vec<_>>(), "1");
    let status_b = run_with_threads(&b_args.iter().map(String::as_str).collect::<Vec<_>>(), "4");
    assert!(status_a.status.success());
    assert!(status_b.status.success());
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "output depends on parallelism degree");
}

#[test]
fn ising_defaults_to_half_half() {
    let out = run(&["ising"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"]["coarse"][0].as_f64().unwrap(), 0.5);
    assert!(report["results"]["dpi_holds"].as_bool().unwrap());
    // invalid temperature is an invalid-parameter failure
    let out = run(&["ising", "--temperature", "0"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn reversal_search_csv_round() {
    let out = run(&[
        "reversal-search",
        "--context",
        "a,b",
        "--target",
        "2/3,0,0,1/3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "schema_version,command,model,context,realization,total_weight,d_star,d_coarse,reversal,constraint_residual,slot,g_star\n"
    ));
    // context label contains a comma: must be quoted per RFC 4180
    assert!(text.contains("\"a,b\""));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let out = run(&["definitely-not-a-command"]);
    assert_eq!(out.status.code(), Some(6));
}
