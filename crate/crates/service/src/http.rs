//! HTTP API under `/v1`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, Request, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use causal_explain::graph::GraphFile;
use causal_explain::ModelFile;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};

use crate::error::{Result, ServiceError};
use crate::ops;
use crate::render;
use crate::session::{Bundle, Session, SessionConfig, Snapshot};

pub const ELAPSED_HEADER: &str = "x-elapsed-ms";

/// Request bodies may carry whole datasets.
const BODY_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub data_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    /// Concurrent computations across all requests.
    pub workers: usize,
    /// Allowed browser origins; empty allows any.
    pub cors_origins: Vec<String>,
    /// Accept `process` black boxes in session requests.
    pub allow_process: bool,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            data_dir: None,
            static_dir: None,
            workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
            cors_origins: Vec::new(),
            allow_process: false,
        }
    }
}

pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    pool: Arc<Semaphore>,
    config: ServeConfig,
}

impl AppState {
    /// State with the sessions persisted under `data_dir/sessions`, if
    /// any. Snapshots that no longer load are reported and skipped.
    pub fn new(config: ServeConfig) -> Result<Arc<Self>> {
        let mut sessions = HashMap::new();
        if let Some(dir) = config.data_dir.as_ref().map(|d| d.join("sessions")) {
            if dir.is_dir() {
                let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect();
                paths.sort();
                for p in paths {
                    let loaded = std::fs::read_to_string(&p)
                        .map_err(ServiceError::from)
                        .and_then(|t| Ok(serde_json::from_str::<Snapshot>(&t)?))
                        .and_then(|s| Session::load(s.id, s.created_at, s.bundle));
                    match loaded {
                        Ok(s) => {
                            sessions.insert(s.id.clone(), Arc::new(s));
                        }
                        Err(e) => eprintln!("skipping session snapshot {}: {e}", p.display()),
                    }
                }
            }
        }
        Ok(Arc::new(AppState {
            sessions: RwLock::new(sessions),
            pool: Arc::new(Semaphore::new(config.workers.max(1))),
            config,
        }))
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Registers a loaded session and writes its snapshot.
    pub fn insert(&self, session: Arc<Session>) -> Result<()> {
        if let Some(dir) = &self.config.data_dir {
            let dir = dir.join("sessions");
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}.json", session.id));
            let tmp = dir.join(format!("{}.json.tmp", session.id));
            std::fs::write(&tmp, serde_json::to_vec(&session.snapshot())?)?;
            std::fs::rename(&tmp, &path)?;
        }
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(session.id.clone(), session);
        Ok(())
    }

    pub fn session_ids(&self) -> Vec<(String, u64)> {
        let guard = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        let mut ids: Vec<(String, u64)> = guard.values().map(|s| (s.id.clone(), s.created_at)).collect();
        ids.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        ids
    }

    /// Resolves a `{"path"}` reference inside the data directory.
    fn read_file(&self, rel: &str) -> Result<String> {
        let root = self
            .config
            .data_dir
            .as_ref()
            .ok_or_else(|| ServiceError::BadRequest("file references need a server data directory".into()))?;
        let root = root.canonicalize()?;
        let path = root
            .join(rel)
            .canonicalize()
            .map_err(|e| ServiceError::BadRequest(format!("cannot open `{rel}`: {e}")))?;
        if !path.starts_with(&root) {
            return Err(ServiceError::BadRequest(format!("`{rel}` is outside the data directory")));
        }
        std::fs::read_to_string(&path).map_err(|e| ServiceError::BadRequest(format!("cannot read `{rel}`: {e}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRef {
    path: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Source<T> {
    File(FileRef),
    Inline(T),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionRequest {
    graph: Source<GraphFile>,
    dataset: Source<String>,
    blackbox: Source<ModelFile>,
    #[serde(default)]
    config: Option<Source<SessionConfig>>,
}

impl AppState {
    fn resolve<T: DeserializeOwned>(&self, src: Source<T>, what: &str) -> Result<T> {
        match src {
            Source::Inline(v) => Ok(v),
            Source::File(f) => {
                let text = self.read_file(&f.path)?;
                serde_json::from_str(&text).map_err(|e| ServiceError::BadRequest(format!("{what} `{}`: {e}", f.path)))
            }
        }
    }

    fn bundle(&self, req: SessionRequest) -> Result<Bundle> {
        let dataset = match req.dataset {
            Source::Inline(csv) => csv,
            Source::File(f) => self.read_file(&f.path)?,
        };
        let bundle = Bundle {
            graph: self.resolve(req.graph, "graph")?,
            dataset,
            blackbox: self.resolve(req.blackbox, "black box")?,
            config: match req.config {
                Some(c) => self.resolve(c, "config")?,
                None => SessionConfig::default(),
            },
        };
        if matches!(bundle.blackbox, ModelFile::Process { .. }) && !self.config.allow_process {
            return Err(ServiceError::BadRequest(
                "process black boxes are disabled on this server (start it with --allow-process)".into(),
            ));
        }
        Ok(bundle)
    }
}

fn error_response(e: &ServiceError) -> Response {
    let status = StatusCode::from_u16(e.http_status()).unwrap_or(StatusCode::BAD_REQUEST);
    json_response(status, render::json(&e.body()))
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| ServiceError::BadRequest(format!("request body: {e}")))
}

/// Runs `f` on the blocking pool once a worker slot is free.
async fn compute<T, F>(state: &AppState, f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T> + Send + 'static,
{
    let _permit = Arc::clone(&state.pool)
        .acquire_owned()
        .await
        .map_err(|_| ServiceError::BadRequest("server is shutting down".into()))?;
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e.to_string())))?
}

fn reply<T: serde::Serialize>(r: Result<T>) -> Response {
    match r {
        Ok(v) => json_response(StatusCode::OK, render::json(&v)),
        Err(e) => error_response(&e),
    }
}

async fn openapi() -> Response {
    json_response(StatusCode::OK, render::json(&crate::openapi::document()))
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> Response {
    let ids: Vec<_> = state
        .session_ids()
        .into_iter()
        .map(|(id, created_at)| json!({ "id": id, "created_at": created_at }))
        .collect();
    json_response(StatusCode::OK, render::json(&ids))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let st = Arc::clone(&state);
    let created = compute(&state, move || {
        let bundle = st.bundle(parse(&body)?)?;
        let session = Session::from_bundle(bundle)?;
        st.insert(Arc::clone(&session))?;
        Ok(session)
    })
    .await;
    match created {
        Ok(s) => json_response(
            StatusCode::CREATED,
            render::json(&json!({ "id": s.id, "created_at": s.created_at })),
        ),
        Err(e) => error_response(&e),
    }
}

async fn schema(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Response {
    reply(state.session(&id).map(|s| s.schema()))
}

/// Looks up the session, parses the body and runs `op` on a worker.
async fn session_op<Req, Resp>(
    state: Arc<AppState>,
    id: String,
    body: Bytes,
    op: fn(&Session, &Req) -> Result<Resp>,
) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Resp: serde::Serialize + Send + 'static,
{
    let session = match state.session(&id) {
        Ok(s) => s,
        Err(e) => return error_response(&e),
    };
    let req: Req = match parse(&body) {
        Ok(r) => r,
        Err(e) => return error_response(&e),
    };
    reply(compute(&state, move || op(&session, &req)).await)
}

async fn scores(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    session_op(state, id, body, ops::scores).await
}

async fn explain(
    State(state): State<Arc<AppState>>,
    UrlPath((id, level)): UrlPath<(String, String)>,
    body: Bytes,
) -> Response {
    let level = match ops::parse_level(&level) {
        Ok(l) => l,
        Err(e) => return error_response(&e),
    };
    let session = match state.session(&id) {
        Ok(s) => s,
        Err(e) => return error_response(&e),
    };
    // An empty body is an empty request.
    let req: ops::ExplainRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ops::ExplainRequest::default()
    } else {
        match parse(&body) {
            Ok(r) => r,
            Err(e) => return error_response(&e),
        }
    };
    reply(compute(&state, move || ops::explain(&session, level, &req)).await)
}

async fn recourse(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    session_op(state, id, body, ops::recourse).await
}

async fn whatif(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    session_op(state, id, body, ops::what_if).await
}

async fn not_found() -> Response {
    let e = json!({ "code": "NOT_FOUND", "message": "no such endpoint" });
    json_response(StatusCode::NOT_FOUND, render::json(&e))
}

async fn timing(req: Request, next: Next) -> Response {
    let start = Instant::now();
    let mut resp = next.run(req).await;
    let ms = format!("{:.3}", start.elapsed().as_secs_f64() * 1e3);
    if let Ok(v) = HeaderValue::from_str(&ms) {
        resp.headers_mut().insert(HeaderName::from_static(ELAPSED_HEADER), v);
    }
    resp
}

fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(ELAPSED_HEADER)]);
    if origins.is_empty() {
        layer.allow_origin(Any)
    } else {
        let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
        layer.allow_origin(AllowOrigin::list(list))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/openapi", get(openapi))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}/schema", get(schema))
        .route("/sessions/{id}/scores", post(scores))
        .route("/sessions/{id}/explain/{level}", post(explain))
        .route("/sessions/{id}/recourse", post(recourse))
        .route("/sessions/{id}/whatif", post(whatif))
        .fallback(not_found);
    let app = Router::new().nest("/v1", api);
    let app = match &state.config.static_dir {
        // Unknown paths fall back to the index page for client-side routing.
        Some(dir) => app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => app.fallback(not_found),
    };
    app.layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(cors(&state.config.cors_origins))
        .layer(middleware::from_fn(timing))
        .with_state(state)
}

/// Binds `addr` and serves until interrupted. `ready` receives the bound
/// address.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr, ready: impl FnOnce(SocketAddr)) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    ready(listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

