//! HTTP interface over analyses: create, inspect, fetch geometry and
//! streams, re-evaluate with new rules.

mod store;

use std::collections::HashMap;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use store::Completed;
pub use store::{FormatName, Handle, Request, Status, Store};

use crate::config::SessionConfig;
use crate::error::Error;
use crate::format::sig6;
use crate::motion::{parse_motion, Motion, MotionFormat, DEFAULT_SCALE};
use crate::pipeline::{Analysis, Assets, Settings};
use crate::risk::RuleSet;

pub const DEFAULT_MAX_FRAMES: usize = 600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>, detail: Value) -> Self {
        Self {
            code: code.to_owned(),
            message: message.into(),
            detail,
        }
    }

    fn from_error(code: &str, e: &Error) -> Self {
        let detail = match e.line() {
            Some(line) => json!({ "line": line }),
            None => Value::Null,
        };
        Self::new(code, e.to_string(), detail)
    }
}

struct Failure(StatusCode, ApiError);

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn fail(status: StatusCode, code: &str, message: impl Into<String>, detail: Value) -> Failure {
    Failure(status, ApiError::new(code, message, detail))
}

/// Session defaults for requests that do not override them.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub assets: Assets,
    pub settings: Settings,
    pub scale: f64,
    pub max_frames: usize,
    pub persist_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            assets: Assets::default(),
            settings: Settings::default(),
            scale: DEFAULT_SCALE,
            max_frames: DEFAULT_MAX_FRAMES,
            persist_dir: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_session(cfg: &SessionConfig) -> crate::Result<Self> {
        cfg.validate()?;
        Ok(Self {
            assets: cfg.load_assets()?,
            settings: cfg.settings(),
            scale: cfg.scale,
            ..Self::default()
        })
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<Store>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    /// Fresh state; with a persistence directory, saved analyses are
    /// recomputed before this returns.
    pub fn new(config: ServiceConfig) -> std::io::Result<Self> {
        let store = match &config.persist_dir {
            Some(dir) => Store::with_dir(dir)?,
            None => Store::in_memory(),
        };
        let state = Self {
            store: Arc::new(store),
            config: Arc::new(config),
        };
        for (handle, request) in state.store.saved_requests()? {
            let id = handle.id.clone();
            let outcome = state.compute(&request, &handle.source);
            state.store.insert(handle, request, false);
            state.store.finish(&id, outcome);
        }
        Ok(state)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn parse(&self, req: &Request) -> Result<Motion, ApiError> {
        let format = match req.format {
            Some(FormatName::Mocap) => MotionFormat::Mocap,
            Some(FormatName::Interchange) => MotionFormat::Interchange,
            None => MotionFormat::detect(&req.motion),
        };
        parse_motion(&req.motion, format, req.scale).map_err(|e| ApiError::from_error("parse_error", &e.into()))
    }

    fn run(&self, motion: Motion, source: &str, req: &Request) -> Result<Completed, ApiError> {
        let mut assets = self.config.assets.clone();
        if let Some(rules) = &req.rules {
            assets.rules = rules.clone();
        }
        let settings = Settings {
            body_mass_kg: req.body_mass_kg,
            ..self.config.settings
        };
        let analysis = Analysis::run(source, motion, &assets, &settings)
            .map_err(|e| ApiError::from_error("analysis_failed", &e))?;
        Ok(Completed {
            report_json: analysis.report.to_json(),
            analysis,
        })
    }

    fn compute(&self, req: &Request, source: &str) -> Result<Completed, ApiError> {
        let motion = self.parse(req)?;
        self.run(motion, source, req)
    }

    /// Register an analysis and run it off the request path.
    pub fn submit(&self, source: &str, req: Request) -> Handle {
        let mut handle = Handle::pending(source, None);
        let parsed = self.parse(&req);
        let id = handle.id.clone();
        self.store.insert(handle.clone(), req.clone(), true);
        match parsed {
            Err(e) => {
                self.store.finish(&id, Err(e.clone()));
                handle.status = Status::Failed;
                handle.error = Some(e);
            }
            Ok(motion) => {
                let state = self.clone();
                let source = handle.source.clone();
                let job = move || {
                    let outcome = state.run(motion, &source, &req);
                    state.store.finish(&id, outcome);
                };
                match tokio::runtime::Handle::try_current() {
                    Ok(rt) => {
                        rt.spawn_blocking(job);
                    }
                    Err(_) => job(),
                }
            }
        }
        handle
    }

    /// Run a motion to completion before returning, for `serve --in`.
    pub fn preload(&self, source: &str, motion_text: String, format: Option<FormatName>) -> Handle {
        let req = Request {
            motion: motion_text,
            format,
            body_mass_kg: self.config.settings.body_mass_kg,
            scale: self.config.scale,
            rules: None,
        };
        let handle = Handle::pending(source, None);
        let outcome = self.compute(&req, &handle.source);
        let id = handle.id.clone();
        self.store.insert(handle, req, true);
        self.store.finish(&id, outcome);
        self.store.get(&id).expect("just inserted").handle
    }

    fn reevaluate(&self, parent_id: &str, rules: RuleSet) -> Result<Handle, Failure> {
        let parent = self.completed(parent_id)?;
        let analysis = parent.1.analysis.reevaluate(rules.clone()).map_err(|e| {
            Failure(
                StatusCode::UNPROCESSABLE_ENTITY,
                ApiError::from_error("invalid_rules", &e),
            )
        })?;
        let handle = Handle::pending(&parent.0.handle.source, Some(parent_id.to_owned()));
        let request = Request {
            rules: Some(rules),
            ..(*parent.0.request).clone()
        };
        self.store.insert(handle.clone(), request, true);
        self.store.finish(
            &handle.id,
            Ok(Completed {
                report_json: analysis.report.to_json(),
                analysis,
            }),
        );
        Ok(self.store.get(&handle.id).map(|e| e.handle).unwrap_or(handle))
    }

    fn entry(&self, id: &str) -> Result<store::Entry, Failure> {
        self.store.get(id).ok_or_else(|| {
            fail(
                StatusCode::NOT_FOUND,
                "unknown_analysis",
                format!("no analysis `{id}`"),
                json!({ "id": id }),
            )
        })
    }

    fn completed(&self, id: &str) -> Result<(store::Entry, Arc<Completed>), Failure> {
        let entry = self.entry(id)?;
        match entry.result.clone() {
            Some(r) => Ok((entry, r)),
            None => Err(fail(
                StatusCode::CONFLICT,
                "not_ready",
                format!("analysis `{id}` is {}", entry.handle.status.as_str()),
                json!({ "id": id, "status": entry.handle.status }),
            )),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/analyses", post(create).get(list))
        .route("/analyses/{id}", get(show))
        .route("/analyses/{id}/frames", get(frames))
        .route("/analyses/{id}/streams", get(streams))
        .route("/analyses/{id}/incidents", get(incidents))
        .route("/analyses/{id}/report", get(report))
        .route("/analyses/{id}/reevaluate", post(reevaluate))
        .with_state(state)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionParams {
    body_mass_kg: Option<f64>,
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    motion: String,
    format: Option<FormatName>,
    source: Option<String>,
    session: Option<SessionParams>,
    rules: Option<RuleSet>,
}

/// Either a JSON envelope `{motion, format?, source?, session?, rules?}`
/// or a bare motion document.
async fn create(State(state): State<AppState>, body: Bytes) -> Response {
    let Ok(text) = std::str::from_utf8(&body) else {
        return fail(
            StatusCode::BAD_REQUEST,
            "invalid_payload",
            "body is not UTF-8",
            Value::Null,
        )
        .into_response();
    };
    let is_envelope = serde_json::from_str::<Value>(text)
        .ok()
        .is_some_and(|v| v.get("motion").is_some());
    let (source, req) = if is_envelope {
        let body: CreateBody = match serde_json::from_str(text) {
            Ok(b) => b,
            Err(e) => {
                let detail = json!({ "line": e.line(), "column": e.column() });
                return fail(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_payload",
                    e.to_string(),
                    detail,
                )
                .into_response();
            }
        };
        let session = body.session.unwrap_or(SessionParams {
            body_mass_kg: None,
            scale: None,
        });
        let req = Request {
            motion: body.motion,
            format: body.format,
            body_mass_kg: session.body_mass_kg.unwrap_or(state.config.settings.body_mass_kg),
            scale: session.scale.unwrap_or(state.config.scale),
            rules: body.rules,
        };
        (body.source.unwrap_or_else(|| "upload".into()), req)
    } else {
        let req = Request {
            motion: text.to_owned(),
            format: None,
            body_mass_kg: state.config.settings.body_mass_kg,
            scale: state.config.scale,
            rules: None,
        };
        ("upload".to_owned(), req)
    };
    if !(req.body_mass_kg.is_finite() && req.body_mass_kg > 0.0) {
        let msg = format!("body_mass_kg must be positive, got {}", req.body_mass_kg);
        return fail(StatusCode::UNPROCESSABLE_ENTITY, "invalid_payload", msg, Value::Null).into_response();
    }
    let handle = state.submit(&source, req);
    let status = match handle.status {
        Status::Failed => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::ACCEPTED,
    };
    (status, Json(handle)).into_response()
}

async fn list(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "analyses": state.store.list() }))
}

async fn show(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Handle>, Failure> {
    Ok(Json(state.entry(&id)?.handle))
}

#[derive(Debug, Deserialize)]
struct FrameRange {
    start: Option<usize>,
    end: Option<usize>,
}

/// World joint positions and orientations for an inclusive frame range.
async fn frames(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<FrameRange>,
) -> Result<Json<Value>, Failure> {
    let (_, done) = state.completed(&id)?;
    let a = &done.analysis;
    let n = a.motion.sequence.len();
    let max = state.config.max_frames;
    let start = q.start.unwrap_or(0);
    let end = q.end.unwrap_or_else(|| (start + max - 1).min(n.saturating_sub(1)));
    let range_err = |msg: String| {
        fail(
            StatusCode::BAD_REQUEST,
            "out_of_range",
            msg,
            json!({ "start": start, "end": end, "frame_count": n, "max_frames": max }),
        )
    };
    if start > end || end >= n {
        return Err(range_err(format!(
            "frame range [{start}, {end}] outside [0, {}]",
            n - 1
        )));
    }
    if end - start + 1 > max {
        return Err(range_err(format!(
            "frame range spans {} frames, at most {max} allowed",
            end - start + 1
        )));
    }
    let joints: Vec<Value> = a
        .motion
        .skeleton
        .joints()
        .iter()
        .map(|j| json!({ "name": j.name, "parent": j.parent }))
        .collect();
    let rate = a.motion.sequence.frame_rate();
    let frames: Vec<Value> = (start..=end)
        .map(|i| {
            let pose = &a.kinematics.poses[i];
            let positions: Vec<[f64; 3]> = pose.positions.iter().map(|p| [p.x, p.y, p.z]).collect();
            let orientations: Vec<[f64; 4]> = pose.orientations.iter().map(|q| [q.w, q.i, q.j, q.k]).collect();
            json!({ "index": i, "time_s": sig6(i as f64 / rate), "positions": positions, "orientations": orientations })
        })
        .collect();
    Ok(Json(json!({
        "start": start,
        "end": end,
        "frame_count": n,
        "frame_rate_hz": sig6(rate),
        "joints": joints,
        "frames": frames,
    })))
}

fn wants_csv(q: &HashMap<String, String>) -> bool {
    q.get("format").is_some_and(|f| f == "csv")
}

fn csv_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv")], body).into_response()
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn streams(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, Failure> {
    let (_, done) = state.completed(&id)?;
    let all = done.analysis.streams();
    let selected: crate::stream::StreamSet = match q.get("ids").filter(|s| !s.is_empty()) {
        None => all.clone(),
        Some(ids) => ids
            .split(',')
            .map(|m| {
                all.get(m.trim()).cloned().ok_or_else(|| {
                    fail(
                        StatusCode::NOT_FOUND,
                        "unknown_measure",
                        format!("unknown measure `{}`", m.trim()),
                        json!({ "measure": m.trim() }),
                    )
                })
            })
            .collect::<Result<_, _>>()?,
    };
    if wants_csv(&q) {
        return Ok(csv_response(crate::report::streams_csv(&selected)));
    }
    let body: Vec<Value> = selected
        .iter()
        .map(|s| json!({ "measure": s.measure, "unit": s.unit, "samples": s.samples.iter().map(|v| sig6(*v)).collect::<Vec<_>>() }))
        .collect();
    let rate = done.analysis.motion.sequence.frame_rate();
    Ok(json_text(
        serde_json::to_string_pretty(&json!({ "frame_rate_hz": sig6(rate), "streams": body }))
            .expect("streams serialize")
            + "\n",
    ))
}

async fn incidents(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, Failure> {
    let (_, done) = state.completed(&id)?;
    let list = &done.analysis.report.incidents;
    if wants_csv(&q) {
        return Ok(csv_response(crate::report::incidents_csv(list)));
    }
    Ok(json_text(
        serde_json::to_string_pretty(&json!({ "incidents": list })).expect("incidents serialize") + "\n",
    ))
}

async fn report(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, Failure> {
    let (_, done) = state.completed(&id)?;
    Ok(json_text(done.report_json.clone()))
}

async fn reevaluate(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<Handle>), Failure> {
    let text = std::str::from_utf8(&body).map_err(|_| {
        fail(
            StatusCode::BAD_REQUEST,
            "invalid_payload",
            "body is not UTF-8",
            Value::Null,
        )
    })?;
    let rules = RuleSet::from_json(text).map_err(|e| {
        Failure(
            StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::from_error("invalid_rules", &e.into()),
        )
    })?;
    let s = state.clone();
    let handle = tokio::task::spawn_blocking(move || s.reevaluate(&id, rules))
        .await
        .map_err(|e| {
            fail(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                e.to_string(),
                Value::Null,
            )
        })??;
    Ok((StatusCode::CREATED, Json(handle)))
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port 0 is not allowed in strict mode")]
    InvalidPort,
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Bind the listener. Port 0 asks the OS for a free port unless `strict`.
pub async fn bind(host: IpAddr, port: u16, strict: bool) -> Result<tokio::net::TcpListener, ServeError> {
    if strict && port == 0 {
        return Err(ServeError::InvalidPort);
    }
    let addr = SocketAddr::new(host, port);
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })
}

/// Serve until ctrl-c.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> Result<(), ServeError> {
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
