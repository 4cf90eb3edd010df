//! Newline-delimited JSON adapter for decision algorithms running as a
//! child process.
//!
//! Request: `{"id": <int>, "features": {<name>: <value>}}`.
//! Reply:   `{"id": <int>, "output": <value>}`.
//! Replies may arrive out of order; every id must be answered once.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    features: &'a Map<String, Json>,
}

#[derive(Deserialize)]
struct Reply {
    id: u64,
    output: Json,
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

/// Child process speaking the NDJSON protocol. Calls are serialized.
pub struct ProcessBackend {
    command: Vec<String>,
    timeout: Duration,
    state: Mutex<Option<Running>>,
}

impl std::fmt::Debug for ProcessBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProcessBackend")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .finish()
    }
}

/// JSON form of a label: a number when it parses as one.
pub fn label_to_json(label: &str) -> Json {
    match label.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::Number::from_f64(x)
            .map(|n| {
                if x.fract() == 0.0 && x.abs() < 1e15 {
                    Json::from(x as i64)
                } else {
                    Json::Number(n)
                }
            })
            .unwrap_or_else(|| Json::String(label.to_string())),
        _ => Json::String(label.to_string()),
    }
}

impl ProcessBackend {
    pub fn new(command: Vec<String>, timeout: Duration) -> Result<Self> {
        if command.is_empty() {
            return Err(Error::Model("process command is empty".into()));
        }
        Ok(ProcessBackend {
            command,
            timeout,
            state: Mutex::new(None),
        })
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn spawn(&self) -> Result<Running> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::BlackBox {
                row: 0,
                message: format!("cannot start `{}`: {e}", self.command[0]),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Running {
            child,
            stdin,
            lines: rx,
            next_id: 0,
        })
    }

    /// Sends one request per feature map and returns the raw outputs in
    /// request order. Errors carry the index of the offending request.
    pub fn call(&self, batch: &[Map<String, Json>]) -> Result<Vec<Json>> {
        let mut guard = self.state.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let result = self.exchange(guard.as_mut().unwrap(), batch);
        if result.is_err() {
            // A failed exchange leaves the stream in an unknown state.
            if let Some(mut run) = guard.take() {
                let _ = run.child.kill();
                let _ = run.child.wait();
            }
        }
        result
    }

    fn exchange(&self, run: &mut Running, batch: &[Map<String, Json>]) -> Result<Vec<Json>> {
        let base = run.next_id;
        run.next_id += batch.len() as u64;
        let fail = |row: usize, message: String| Error::BlackBox { row, message };
        let mut payload = Vec::new();
        for (i, features) in batch.iter().enumerate() {
            let req = Request {
                id: base + i as u64,
                features,
            };
            serde_json::to_writer(&mut payload, &req)?;
            payload.push(b'\n');
        }
        run.stdin
            .write_all(&payload)
            .and_then(|_| run.stdin.flush())
            .map_err(|e| fail(0, format!("write failed: {e}")))?;

        let mut out: BTreeMap<u64, Json> = BTreeMap::new();
        let deadline = Instant::now() + self.timeout;
        while out.len() < batch.len() {
            let pending = (0..batch.len())
                .find(|i| !out.contains_key(&(base + *i as u64)))
                .unwrap_or(0);
            let wait = deadline.saturating_duration_since(Instant::now());
            let line = match run.lines.recv_timeout(wait) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(fail(pending, format!("read failed: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(fail(
                        pending,
                        format!("no reply within {} s", self.timeout.as_secs_f64()),
                    ))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(fail(pending, "process exited".into()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let reply: Reply = serde_json::from_str(&line)
                .map_err(|e| fail(pending, format!("malformed reply `{line}`: {e}")))?;
            if reply.id < base || reply.id >= base + batch.len() as u64 {
                return Err(fail(pending, format!("reply with unknown id {}", reply.id)));
            }
            let row = (reply.id - base) as usize;
            if out.insert(reply.id, reply.output).is_some() {
                return Err(fail(row, format!("duplicate reply for id {}", reply.id)));
            }
        }
        Ok(out.into_values().collect())
    }
}

impl Drop for ProcessBackend {
    fn drop(&mut self) {
        if let Ok(mut g) = self.state.lock() {
            if let Some(mut run) = g.take() {
                drop(run.stdin);
                let _ = run.child.kill();
                let _ = run.child.wait();
            }
        }
    }
}
