mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};

use common::{args, cli, f1_scm_path, Fixture};
use serde_json::Value;

#[test]
fn missing_graph_prints_usage_and_fails() {
    let fx = Fixture::new();
    let mut a = args(&["scores", "--x", "X=1", "--x-prime", "X=0"]);
    a.extend(args(&["--data", fx.path("data.csv").to_str().unwrap()]));
    let out = cli(&a);
    assert_eq!(out.status, 1);
    assert!(out.stderr.contains("--graph"), "{}", out.stderr);
    assert!(out.stderr.contains("Usage:"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn help_version_and_parse_errors() {
    assert_eq!(cli(&args(&["--help"])).status, 0);
    assert_eq!(cli(&args(&["--version"])).status, 0);
    assert_eq!(cli(&args(&["explain", "sideways"])).status, 1);
    assert_eq!(cli(&args(&["scores", "--format", "xml"])).status, 1);
}

#[test]
fn validate_bounds_on_the_fixture_file() {
    let out = cli(&args(&[
        "simulate",
        "--scm",
        f1_scm_path().to_str().unwrap(),
        "--validate-bounds",
        "--trials",
        "100",
    ]));
    assert_eq!(out.status, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["validation"]["trials"], 100);
    assert_eq!(v["validation"]["violations"].as_array().unwrap().len(), 0);
    assert!(v["validation"]["checked"].as_u64().unwrap() > 0);
}

#[test]
fn infeasible_recourse_prints_the_plan_and_exits_3() {
    let fx = Fixture::new();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["recourse", "--individual", r#"{"Z": 0, "X": 0}"#, "--actionable", "X", "--alpha", "1"]));
    let out = cli(&a);
    assert_eq!(out.status, 3, "{}", out.stderr);
    let plan: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(plan["feasible"], false);
    assert_eq!(plan["changes"], serde_json::json!([]));
    assert_eq!(plan["constraint"]["status"], "infeasible");
    assert!(out.stderr.contains("INFEASIBLE"));
}

#[test]
fn descendant_context_exits_2() {
    let fx = Fixture::new();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["scores", "--x", "Z=1", "--x-prime", "Z=0", "--context", "X=1"]));
    let out = cli(&a);
    assert_eq!(out.status, 2, "{}", out.stderr);
    assert!(out.stderr.contains("NOT_IDENTIFIABLE"));
}

#[test]
fn validation_errors_exit_1() {
    let fx = Fixture::new();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["scores", "--x", "Q=1", "--x-prime", "Q=0"]));
    let out = cli(&a);
    assert_eq!(out.status, 1);
    assert!(out.stderr.contains("SCHEMA_MISMATCH"), "{}", out.stderr);
}

#[test]
fn scores_match_the_oracle_within_sampling_error() {
    let fx = Fixture::new();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["scores", "--x", "X=1", "--x-prime", "X=0", "--context", "Z=1"]));
    let out = cli(&a);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let est: Value = serde_json::from_str(&out.stdout).unwrap();

    let truth = cli(&args(&[
        "simulate", "--fixture", "f1", "--ground-truth", "--x", "X=1", "--x-prime", "X=0", "--context", "Z=1",
    ]));
    assert_eq!(truth.status, 0, "{}", truth.stderr);
    let truth: Value = serde_json::from_str(&truth.stdout).unwrap();
    for k in ["nec", "suf", "nesuf"] {
        let e = est["scores"][k].as_f64().unwrap();
        let t = truth["ground_truth"]["scores"][k].as_f64().unwrap();
        assert!((e - t).abs() < 0.05, "{k}: {e} vs {t}");
    }
}

#[test]
fn simulate_sample_round_trips_into_a_session() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let d = dir.path().join("d.csv");
    let out = cli(&args(&[
        "simulate", "--fixture", "german", "--sample", "500", "--out", d.to_str().unwrap(), "--export-graph",
        g.to_str().unwrap(), "--seed", "4",
    ]));
    assert_eq!(out.status, 0, "{}", out.stderr);
    let header = std::fs::read_to_string(&d).unwrap();
    assert!(header.starts_with("Age,Sex,Status,Savings,Housing,Duration,O"), "{header}");
    let again = cli(&args(&["simulate", "--fixture", "german", "--sample", "500", "--seed", "4"]));
    assert_eq!(again.stdout, header, "sampling is seeded");

    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"kind": "column", "inputs": ["Status", "Savings", "Housing", "Duration"], "outcome": {"name": "O", "threshold": "0.5"}}"#).unwrap();
    let out = cli(&args(&[
        "explain", "global", "--graph", g.to_str().unwrap(), "--data", d.to_str().unwrap(), "--blackbox",
        m.to_str().unwrap(), "--smoothing", "1", "--format", "table",
    ]));
    assert_eq!(out.status, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("Global explanation"), "{}", out.stdout);
}

#[test]
fn request_files_are_accepted() {
    let fx = Fixture::new();
    let req = fx.path("req.json");
    std::fs::write(&req, r#"{"query": {"x": {"X": 1}, "x_prime": {"X": 0}, "context": {"Z": 1}}, "mode": "bounds"}"#)
        .unwrap();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["scores", "--request", req.to_str().unwrap()]));
    let out = cli(&a);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["mode"], "bounds");
    let nec = &v["bounds"]["nec"];
    assert!(nec["lower"].as_f64().unwrap() <= nec["upper"].as_f64().unwrap());
}

fn http_get(addr: &str, path: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut out = String::new();
    stream.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn serve_preloads_a_session_and_answers_over_tcp() {
    let fx = Fixture::new();
    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<html>ui</html>").unwrap();
    let mut a = fx.session_args("graph.json", "column.json");
    a.extend(args(&["serve", "--port", "0", "--workers", "2", "--static", assets.path().to_str().unwrap()]));
    let mut child = Command::new(env!("CARGO_BIN_EXE_causal-explain"))
        .args(&a)
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let session = lines.next().unwrap().unwrap();
    let id = session.strip_prefix("session ").expect("session line").to_string();
    let listening = lines.next().unwrap().unwrap();
    let addr = listening.strip_prefix("listening on http://").expect("address line").to_string();

    let schema = http_get(&addr, &format!("/v1/sessions/{id}/schema"));
    let index = http_get(&addr, "/");
    let openapi = http_get(&addr, "/v1/openapi");
    child.kill().unwrap();
    child.wait().unwrap();

    assert!(schema.starts_with("HTTP/1.1 200"), "{schema}");
    assert!(schema.to_ascii_lowercase().contains("x-elapsed-ms:"));
    assert!(schema.contains(&format!("\"id\": \"{id}\"")));
    assert!(index.ends_with("<html>ui</html>"), "{index}");
    assert!(openapi.contains("\"openapi\": \"3.0.3\""));
}
