//! Session-oriented HTTP JSON API for playing one brand against a rival
//! strategy.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/sessions` | `{domain, rival, rounds?}` |
//! | POST | `/sessions/{id}/move` | `{site}`, optional `Idempotency-Key` header |
//! | GET | `/sessions/{id}` | |
//! | GET | `/sessions/{id}/history` | |
//! | GET | `/sessions/{id}/whatif` | `?site=k` |
//! | GET | `/sessions/{id}/measure` | |
//!
//! Errors carry `{"error": code, "message": text}`.

mod error;
mod session;

use std::collections::HashMap;
use std::future::Future;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use rcs_core::files::DomainFile;
use rcs_core::harness::MatchState;
use rcs_core::placement::StrategySpec;
use rcs_core::{Domain, DomainKind, GreenKernel, SiteId};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::Mutex as SessionLock;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use session::{MeasureExport, MoveReply, Session, SessionView, Status, WhatIf};

/// Sessions on larger domains are refused to keep each move interactive.
pub const MAX_SITES: usize = 4096;

pub const IDEMPOTENCY_KEY: &str = "idempotency-key";

#[derive(Clone, Debug)]
pub struct Config {
    pub max_sessions: usize,
    /// `*` allows any origin.
    pub cors_origin: Option<String>,
    /// Written as a JSON list of sessions on graceful shutdown.
    pub snapshot: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config { max_sessions: 64, cors_origin: None, snapshot: None }
    }
}

/// Shared service state.
pub struct App {
    config: Config,
    /// Domains addressable by name, besides the built-in ones.
    domains: HashMap<String, Arc<Domain>>,
    kernels: Mutex<HashMap<String, Arc<GreenKernel>>>,
    sessions: RwLock<HashMap<String, Arc<SessionLock<Session>>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DomainRequest {
    Name(String),
    Build { kind: DomainKind, resolution: usize, dim: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    domain: DomainRequest,
    rival: StrategySpec,
    #[serde(default)]
    rounds: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    site: SiteId,
}

impl App {
    pub fn new(config: Config, domains: Vec<Domain>) -> Arc<App> {
        let domains = domains.into_iter().map(|d| (d.name().to_string(), Arc::new(d))).collect();
        Arc::new(App { config, domains, kernels: Mutex::new(HashMap::new()), sessions: RwLock::new(HashMap::new()) })
    }

    pub fn session(&self, id: &str) -> Option<Arc<SessionLock<Session>>> {
        self.sessions.read().expect("session table lock").get(id).cloned()
    }

    fn find(&self, id: &str) -> Result<Arc<SessionLock<Session>>, ApiError> {
        self.session(id).ok_or_else(|| ApiError::not_found(id))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session table lock").len()
    }

    /// Views of every session, ordered by id.
    pub async fn snapshot(&self) -> Vec<SessionView> {
        let mut all: Vec<_> = self.sessions.read().expect("session table lock").values().cloned().collect();
        let mut out = Vec::with_capacity(all.len());
        for s in all.drain(..) {
            out.push(s.lock().await.view());
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    fn resolve_domain(&self, req: &DomainRequest) -> Result<Arc<Domain>, ApiError> {
        match req {
            DomainRequest::Name(name) => match self.domains.get(name) {
                Some(d) => Ok(d.clone()),
                None => {
                    let d = Domain::from_name(name)?;
                    check_size(d.len())?;
                    Ok(Arc::new(d))
                }
            },
            &DomainRequest::Build { kind, resolution, dim } => {
                let n = match kind {
                    DomainKind::SpherePoints => Some(resolution),
                    _ => u32::try_from(dim).ok().and_then(|d| resolution.checked_pow(d)),
                };
                check_size(n.unwrap_or(usize::MAX))?;
                Ok(Arc::new(Domain::build(kind, resolution, dim)?))
            }
        }
    }

    fn kernel(&self, domain: &Domain) -> Result<Arc<GreenKernel>, ApiError> {
        if let Some(k) = self.kernels.lock().expect("kernel cache lock").get(domain.name()) {
            return Ok(k.clone());
        }
        let k = Arc::new(GreenKernel::build_with_env_cache(domain)?);
        self.kernels.lock().expect("kernel cache lock").insert(domain.name().to_string(), k.clone());
        Ok(k)
    }

    fn create(&self, req: CreateRequest) -> Result<Value, ApiError> {
        if self.session_count() >= self.config.max_sessions {
            return Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "too-many-sessions",
                format!("the service holds its maximum of {} sessions", self.config.max_sessions),
            ));
        }
        let domain = self.resolve_domain(&req.domain)?;
        let (rival, schedule) = req.rival.resolve()?;
        if req.rounds == Some(0) {
            return Err(ApiError::bad_request("rounds must be positive"));
        }
        // the first human move must be playable
        rival.check_schedule(&schedule, 1)?;
        let kernel = self.kernel(&domain)?;
        let state = MatchState::new(&domain, &kernel, &rival, &schedule)?;
        let id = format!("{:032x}", rand::random::<u128>());
        let session = Session {
            id: id.clone(),
            domain: domain.clone(),
            kernel,
            spec: req.rival,
            rival,
            state,
            rounds: req.rounds,
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            status: Status::AwaitingHuman,
            replies: HashMap::new(),
        };
        let body = json!({"id": id, "board": DomainFile::from_domain(&domain), "state": session.view()});
        let mut table = self.sessions.write().expect("session table lock");
        if table.len() >= self.config.max_sessions {
            return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "too-many-sessions", "session limit reached"));
        }
        table.insert(id, Arc::new(SessionLock::new(session)));
        Ok(body)
    }
}

fn check_size(n: usize) -> Result<(), ApiError> {
    if n > MAX_SITES {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "domain-too-large",
            format!("sessions allow at most {MAX_SITES} sites"),
        ));
    }
    Ok(())
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))
}

async fn create(State(app): State<Arc<App>>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: CreateRequest = parse(&body)?;
    let body = blocking(move || app.create(req)).await??;
    Ok((StatusCode::CREATED, Json(body)))
}

async fn make_move(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let session = app.find(&id)?;
    let key = match headers.get(IDEMPOTENCY_KEY) {
        Some(v) => Some(v.to_str().map_err(|_| ApiError::bad_request("Idempotency-Key must be visible ASCII"))?.to_string()),
        None => None,
    };
    // one move at a time per session; a second concurrent move is refused
    let mut guard = session
        .try_lock_owned()
        .map_err(|_| ApiError::conflict("session-busy", "another move on this session is in progress"))?;
    if let Some(stored) = key.as_ref().and_then(|k| guard.replies.get(k)) {
        return Ok(Json(stored.clone()));
    }
    let req: MoveRequest = parse(&body)?;
    let reply = blocking(move || {
        let reply = guard.play(req.site).map(|r| serde_json::to_value(r).expect("reply serializes"));
        if let (Ok(v), Some(k)) = (&reply, key) {
            guard.replies.insert(k, v.clone());
        }
        reply
    })
    .await??;
    Ok(Json(reply))
}

async fn get_session(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = app.find(&id)?;
    let view = session.lock().await.view();
    Ok(Json(view))
}

async fn history(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = app.find(&id)?;
    let history = serde_json::to_value(session.lock().await.history()).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(history))
}

async fn whatif(
    State(app): State<Arc<App>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<WhatIf>, ApiError> {
    let session = app.find(&id)?;
    let site = query
        .get("site")
        .ok_or_else(|| ApiError::bad_request("missing `site` query parameter"))?
        .parse::<SiteId>()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid-site", e.to_string()))?;
    let guard = session.lock_owned().await;
    Ok(Json(blocking(move || guard.whatif(site)).await??))
}

async fn measure(State(app): State<Arc<App>>, Path(id): Path<String>) -> Result<Json<MeasureExport>, ApiError> {
    let session = app.find(&id)?;
    let guard = session.lock_owned().await;
    Ok(Json(blocking(move || guard.measures()).await??))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint")
}

/// The service routes, with CORS when configured.
pub fn router(app: Arc<App>) -> Result<Router, ApiError> {
    let cors = match app.config.cors_origin.as_deref() {
        None => None,
        Some(origin) => {
            let allow = if origin == "*" {
                AllowOrigin::any()
            } else {
                AllowOrigin::exact(
                    HeaderValue::from_str(origin).map_err(|_| ApiError::bad_request(format!("bad CORS origin `{origin}`")))?,
                )
            };
            Some(
                CorsLayer::new()
                    .allow_origin(allow)
                    .allow_methods([Method::GET, Method::POST])
                    .allow_headers([header::CONTENT_TYPE, HeaderName::from_static(IDEMPOTENCY_KEY)]),
            )
        }
    };
    let router = Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/move", post(make_move))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/whatif", get(whatif))
        .route("/sessions/{id}/measure", get(measure))
        .fallback(fallback)
        .with_state(app);
    Ok(match cors {
        Some(layer) => router.layer(layer),
        None => router,
    })
}

/// Serves until `shutdown` resolves, then writes the snapshot if configured.
pub async fn serve(app: Arc<App>, listener: TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let router = router(app.clone()).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.message))?;
    log::info!("serving on {}", listener.local_addr()?);
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await?;
    if let Some(path) = &app.config.snapshot {
        let views = app.snapshot().await;
        let text = serde_json::to_string_pretty(&views).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")?;
        log::info!("wrote {} sessions to {}", views.len(), path.display());
    }
    Ok(())
}
