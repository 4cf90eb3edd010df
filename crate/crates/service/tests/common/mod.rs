#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, Response};
use causal_explain::data::CsvOptions;
use causal_explain::oracle::generate::f1;
use causal_explain_service::http::{router, AppState, ServeConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const COLUMN_MODEL: &str = r#"{"kind": "column", "outcome": {"name": "O", "threshold": 1}}"#;
pub const EXPR_MODEL: &str = r#"{"kind": "expr", "inputs": ["Z", "X"], "outcome": {"name": "O", "domain": [0, 1], "threshold": 1}, "expr": "if X == 1 or Z == 1 then 1 else 0"}"#;

/// Same rule as [`EXPR_MODEL`], answered by a child process.
pub const PROCESS_SCRIPT: &str = r#"import json, sys
for line in sys.stdin:
    req = json.loads(line)
    f = req["features"]
    out = 1 if f["X"] == 1 or f["Z"] == 1 else 0
    print(json.dumps({"id": req["id"], "output": out}), flush=True)
"#;

pub fn f1_scm_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/f1.json")
}

/// Files for a session on the F1 model: `graph.json` (with `O`),
/// `features.json` (without `O`), `data.csv`, `column.json`, `expr.json`,
/// `process.json` and `model.py`.
pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let scm = f1();
        let graph = scm.graph().to_file();
        std::fs::write(dir.path().join("graph.json"), serde_json::to_string(&graph).unwrap()).unwrap();
        let mut features = graph.clone();
        features.variables.retain(|v| v.name != "O");
        features.edges.retain(|(_, c)| c != "O");
        std::fs::write(dir.path().join("features.json"), serde_json::to_string(&features).unwrap()).unwrap();
        let data = scm.sample_dataset(4000, 7).unwrap();
        let mut csv = Vec::new();
        data.write_csv(&mut csv, &CsvOptions::default()).unwrap();
        std::fs::write(dir.path().join("data.csv"), csv).unwrap();
        std::fs::write(dir.path().join("column.json"), COLUMN_MODEL).unwrap();
        std::fs::write(dir.path().join("expr.json"), EXPR_MODEL).unwrap();
        let script = dir.path().join("model.py");
        std::fs::write(&script, PROCESS_SCRIPT).unwrap();
        let process = serde_json::json!({
            "kind": "process",
            "inputs": ["Z", "X"],
            "outcome": {"name": "O", "domain": [0, 1], "threshold": 1},
            "command": ["python3", script.to_str().unwrap()],
        });
        std::fs::write(dir.path().join("process.json"), process.to_string()).unwrap();
        Fixture { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn text(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    /// Session request body with everything inline.
    pub fn inline_session(&self, graph: &str, model: &str) -> Value {
        serde_json::json!({
            "graph": serde_json::from_str::<Value>(&self.text(graph)).unwrap(),
            "dataset": self.text("data.csv"),
            "blackbox": serde_json::from_str::<Value>(&self.text(model)).unwrap(),
        })
    }

    /// CLI arguments selecting the session files.
    pub fn session_args(&self, graph: &str, model: &str) -> Vec<String> {
        vec![
            "--graph".into(),
            self.path(graph).display().to_string(),
            "--data".into(),
            self.path("data.csv").display().to_string(),
            "--blackbox".into(),
            self.path(model).display().to_string(),
        ]
    }
}

pub struct CliOutput {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[String]) -> CliOutput {
    let out = Command::new(env!("CARGO_BIN_EXE_causal-explain")).args(args).output().unwrap();
    CliOutput {
        status: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub struct Api {
    pub state: Arc<AppState>,
}

pub struct Reply {
    pub status: u16,
    pub headers: axum::http::HeaderMap,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

async fn collect(resp: Response<Body>) -> Reply {
    let status = resp.status().as_u16();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        headers,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

impl Api {
    pub fn new(config: ServeConfig) -> Self {
        Api {
            state: AppState::new(config).unwrap(),
        }
    }

    pub async fn send(&self, req: Request<Body>) -> Reply {
        collect(router(Arc::clone(&self.state)).oneshot(req).await.unwrap()).await
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Request::get(uri).body(Body::empty()).unwrap()).await
    }

    pub async fn post_raw(&self, uri: &str, body: impl Into<String>) -> Reply {
        let req = Request::post(uri)
            .header("content-type", "application/json")
            .body(Body::from(body.into()))
            .unwrap();
        self.send(req).await
    }

    pub async fn post(&self, uri: &str, body: &Value) -> Reply {
        self.post_raw(uri, body.to_string()).await
    }

    /// Creates a session and returns its id.
    pub async fn session(&self, body: &Value) -> String {
        let r = self.post("/v1/sessions", body).await;
        assert_eq!(r.status, 201, "{}", r.body);
        r.json()["id"].as_str().unwrap().to_string()
    }
}
