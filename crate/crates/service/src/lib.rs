//! HTTP front end for the tagging pipeline.
//!
//! `GET /api/models` lists the loaded models. `POST /api/process` takes
//! url-encoded form fields and answers `{"model": ..., "result": <CoNLL-U>}`:
//!
//! - `data`: the input, required.
//! - `model`: model name, defaults to the first loaded model.
//! - `tokenizer`, `tagger`: stages to run. When neither is given both run.
//! - `dictionary`: rescore with the model's dictionary, on by default.
//! - `input`: `text` or `conllu`; defaults to `text` when the tokenizer
//!   runs and `conllu` otherwise.
//! - `output`: only `conllu` is supported.
//!
//! A flag is on when present with an empty value or one of `1`, `true`,
//! `on`, `yes`, and off for `0`, `false`, `off`, `no`.

use std::collections::HashMap;
use std::future::Future;
use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use morphtag::conllu_io::{parse_conllu, tokenize, write_conllu, Abbreviations};
use morphtag::pipeline::annotate;
use morphtag::{MorphDict, TaggerModel};
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;

pub const DEFAULT_MAX_DATA_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no models configured")]
    NoModels,
    #[error("duplicate model name {0:?}")]
    DuplicateModel(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A servable model with its optional dictionary.
pub struct ModelBundle {
    pub name: String,
    pub model: TaggerModel,
    pub dictionary: Option<MorphDict>,
    pub abbreviations: Abbreviations,
}

/// Where access log lines go.
#[derive(Clone, Default)]
pub enum AccessLog {
    #[default]
    Stderr,
    Off,
    Memory(Arc<Mutex<Vec<String>>>),
}

impl AccessLog {
    fn emit(&self, line: String) {
        match self {
            AccessLog::Stderr => {
                let _ = writeln!(std::io::stderr().lock(), "{line}");
            }
            AccessLog::Off => {}
            AccessLog::Memory(lines) => lines.lock().unwrap().push(line),
        }
    }
}

pub struct ServiceConfig {
    pub models: Vec<ModelBundle>,
    pub max_data_bytes: usize,
    pub access_log: AccessLog,
}

impl ServiceConfig {
    pub fn new(models: Vec<ModelBundle>) -> Self {
        ServiceConfig {
            models,
            max_data_bytes: DEFAULT_MAX_DATA_BYTES,
            access_log: AccessLog::default(),
        }
    }
}

struct AppState {
    models: Vec<ModelBundle>,
    max_data_bytes: usize,
    access_log: AccessLog,
}

/// Validated, shareable service state.
#[derive(Clone)]
pub struct Service(Arc<AppState>);

impl Service {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        if config.models.is_empty() {
            return Err(ServiceError::NoModels);
        }
        let mut names = std::collections::HashSet::new();
        for m in &config.models {
            if !names.insert(m.name.as_str()) {
                return Err(ServiceError::DuplicateModel(m.name.clone()));
            }
        }
        Ok(Service(Arc::new(AppState {
            models: config.models,
            max_data_bytes: config.max_data_bytes,
            access_log: config.access_log,
        })))
    }

    pub fn router(&self) -> Router {
        // Url-encoding can triple the size of the data field, so the body
        // limit is looser than the data limit checked in the handler.
        let body_limit = self
            .0
            .max_data_bytes
            .saturating_mul(3)
            .saturating_add(64 * 1024);
        Router::new()
            .route("/api/models", get(models))
            .route("/api/process", post(process))
            .layer(DefaultBodyLimit::max(body_limit))
            .layer(middleware::from_fn_with_state(self.clone(), access_log))
            .with_state(self.clone())
    }

    /// Serves until `shutdown` resolves, then drains in-flight requests.
    pub async fn serve(
        self,
        listener: TcpListener,
        shutdown: impl Future<Output = ()> + Send + 'static,
    ) -> Result<(), ServiceError> {
        axum::serve(listener, self.router())
            .with_graceful_shutdown(shutdown)
            .await?;
        Ok(())
    }
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

async fn access_log(State(service): State<Service>, request: Request, next: Next) -> Response {
    let start = Instant::now();
    let method = request.method().to_string();
    let path = request.uri().path().to_owned();
    let response = next.run(request).await;
    let line = json!({
        "method": method,
        "path": path,
        "status": response.status().as_u16(),
        "duration_ms": start.elapsed().as_secs_f64() * 1000.0,
    });
    service.0.access_log.emit(line.to_string());
    response
}

async fn models(State(service): State<Service>) -> Json<serde_json::Value> {
    let models: serde_json::Map<String, serde_json::Value> = service
        .0
        .models
        .iter()
        .map(|m| (m.name.clone(), json!(["tokenizer", "tagger"])))
        .collect();
    Json(json!({
        "models": models,
        "default_model": service.0.models[0].name,
    }))
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, message.into())
}

fn flag(fields: &HashMap<String, String>, name: &str) -> Result<Option<bool>, ApiError> {
    match fields.get(name).map(|v| v.to_ascii_lowercase()) {
        None => Ok(None),
        Some(v) => match v.as_str() {
            "" | "1" | "true" | "on" | "yes" => Ok(Some(true)),
            "0" | "false" | "off" | "no" => Ok(Some(false)),
            _ => Err(bad_request(format!(
                "invalid value {v:?} for flag {name:?}"
            ))),
        },
    }
}

struct ProcessRequest {
    model: usize,
    data: String,
    tokenizer: bool,
    tagger: bool,
    dictionary: bool,
    text_input: bool,
}

fn parse_request(
    service: &Service,
    headers: &axum::http::HeaderMap,
    body: &[u8],
) -> Result<ProcessRequest, ApiError> {
    if let Some(ct) = headers.get(header::CONTENT_TYPE) {
        let ct = ct.to_str().unwrap_or_default();
        if !ct.starts_with("application/x-www-form-urlencoded") {
            return Err(ApiError(
                StatusCode::UNSUPPORTED_MEDIA_TYPE,
                "expected application/x-www-form-urlencoded".into(),
            ));
        }
    }
    let fields: HashMap<String, String> = form_urlencoded::parse(body).into_owned().collect();
    let data = fields
        .get("data")
        .cloned()
        .ok_or_else(|| bad_request("missing required field \"data\""))?;
    if data.len() > service.0.max_data_bytes {
        return Err(ApiError(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("data exceeds {} bytes", service.0.max_data_bytes),
        ));
    }
    let model = match fields.get("model").filter(|m| !m.is_empty()) {
        None => 0,
        Some(name) => service
            .0
            .models
            .iter()
            .position(|m| &m.name == name)
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown model {name:?}")))?,
    };
    let (tokenizer, tagger) = match (flag(&fields, "tokenizer")?, flag(&fields, "tagger")?) {
        (None, None) => (true, true),
        (t, g) => (t.unwrap_or(false), g.unwrap_or(false)),
    };
    let dictionary = flag(&fields, "dictionary")?.unwrap_or(true);
    let text_input = match fields.get("input").map(String::as_str) {
        None => tokenizer,
        Some("text") => true,
        Some("conllu") => false,
        Some(other) => return Err(bad_request(format!("unsupported input format {other:?}"))),
    };
    if text_input && !tokenizer {
        return Err(bad_request("text input requires the tokenizer"));
    }
    match fields.get("output").map(String::as_str) {
        None | Some("conllu") => {}
        Some(other) => return Err(bad_request(format!("unsupported output format {other:?}"))),
    }
    Ok(ProcessRequest {
        model,
        data,
        tokenizer,
        tagger,
        dictionary,
        text_input,
    })
}

fn run(service: &Service, req: ProcessRequest) -> Result<serde_json::Value, ApiError> {
    let bundle = &service.0.models[req.model];
    let sentences = if req.text_input && req.tokenizer {
        tokenize(&req.data, &bundle.abbreviations)
    } else {
        parse_conllu(&req.data).map_err(|e| bad_request(format!("cannot parse input: {e}")))?
    };
    let sentences = if req.tagger {
        let dict = if req.dictionary {
            bundle.dictionary.as_ref()
        } else {
            None
        };
        annotate(&bundle.model, dict, &sentences, 1)
            .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    } else {
        sentences
    };
    Ok(json!({
        "model": bundle.name,
        "result": write_conllu(&sentences),
    }))
}

async fn process(
    State(service): State<Service>,
    headers: axum::http::HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let body = body.map_err(|e| ApiError(e.status(), e.body_text()))?;
    let req = parse_request(&service, &headers, &body)?;
    let svc = service.clone();
    let result = tokio::task::spawn_blocking(move || run(&svc, req))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(result))
}
