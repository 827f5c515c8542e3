//! JSON-over-HTTP API. Every handler is stateless apart from the shared,
//! immutable registry.
//!
//! | route                 | body                         | response                   |
//! |-----------------------|------------------------------|----------------------------|
//! | `GET /api/vocabulary` |                              | registry file              |
//! | `POST /api/validate`  | document (`?format=`)        | diagnostics array          |
//! | `POST /api/convert`   | document (`?to=`, `?from=`)  | canonical document         |
//! | `POST /api/match`     | `{request, offers, weights}` | ranked report array        |
//!
//! Documents are sniffed as JSON or DSL unless the format is given.
//! Failures answer `{"error": {"code", "message", "path"?}}`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::json;
use slaiot_core::codec::{self, Format};
use slaiot_core::diagnostic::Diagnostics;
use slaiot_core::keyword::UnknownKeyword;
use slaiot_core::matcher::Weights;
use slaiot_core::model::SlaDocument;
use slaiot_core::vocabulary::VocabularyRegistry;
use tower_http::services::ServeDir;

use crate::engine;

const INDEX: &str = include_str!("../assets/index.html");

type Registry = Arc<VocabularyRegistry>;

pub fn router(registry: Registry, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/vocabulary", get(vocabulary))
        .route("/validate", post(validate))
        .route("/convert", post(convert))
        .route("/match", post(match_offers))
        .fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint")
        })
        .with_state(registry);
    let app = Router::new().nest("/api", api);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(INDEX) })),
    }
}

/// Serialized as `{"error": {"code", "message", "path"?}}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
    path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.into(),
            message: message.into(),
            path: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    /// The first error of a rejected document.
    fn invalid(d: &Diagnostics, context: &str) -> Self {
        let first = d.errors().next().unwrap_or(&d.0[0]);
        ApiError {
            path: first.path.clone(),
            ..ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                first.code.as_str(),
                format!("{context}{}", first.message),
            )
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some(p) = self.path {
            body["path"] = json!(p);
        }
        let mut text = serde_json::to_string_pretty(&json!({ "error": body })).expect("serializes");
        text.push('\n');
        (
            self.status,
            [(header::CONTENT_TYPE, "application/json")],
            text,
        )
            .into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn ok(content_type: &'static str, body: String) -> ApiResult {
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, content_type)], body).into_response())
}

fn format_param(q: &HashMap<String, String>, key: &str) -> Result<Option<Format>, ApiError> {
    q.get(key)
        .map(|v| {
            v.parse()
                .map_err(|e: UnknownKeyword| ApiError::bad_request(format!("{key}: {e}")))
        })
        .transpose()
}

async fn vocabulary(State(reg): State<Registry>) -> ApiResult {
    ok("application/json", reg.to_json())
}

async fn validate(
    State(reg): State<Registry>,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    let format = format_param(&q, "format")?.unwrap_or_else(|| Format::sniff(&body));
    ok(
        "application/json",
        engine::diagnostics_json(&engine::validate(&body, format, &reg)),
    )
}

async fn convert(
    State(reg): State<Registry>,
    Query(q): Query<HashMap<String, String>>,
    body: String,
) -> ApiResult {
    let to =
        format_param(&q, "to")?.ok_or_else(|| ApiError::bad_request("missing 'to' parameter"))?;
    let from = format_param(&q, "from")?.unwrap_or_else(|| Format::sniff(&body));
    let text = codec::convert(&body, from, to, &reg).map_err(|d| ApiError::invalid(&d, ""))?;
    ok(
        match to {
            Format::Json => "application/json",
            Format::Dsl => "text/plain; charset=utf-8",
        },
        text,
    )
}

/// A document inline as JSON, or as DSL or JSON text.
#[derive(Deserialize)]
#[serde(untagged)]
enum DocInput {
    Text(String),
    Json(serde_json::Value),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchBody {
    request: DocInput,
    offers: Vec<DocInput>,
    #[serde(default)]
    weights: Option<String>,
}

fn document(
    input: &DocInput,
    reg: &VocabularyRegistry,
    context: &str,
) -> Result<SlaDocument, ApiError> {
    let (text, format) = match input {
        DocInput::Text(t) => (t.clone(), Format::sniff(t)),
        DocInput::Json(v) => (v.to_string(), Format::Json),
    };
    codec::parse(&text, format, reg)
        .map(|v| v.document)
        .map_err(|d| ApiError::invalid(&d, &format!("{context}: ")))
}

async fn match_offers(State(reg): State<Registry>, body: String) -> ApiResult {
    let body: MatchBody =
        serde_json::from_str(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let weights: Weights = body
        .weights
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(ApiError::bad_request)?
        .unwrap_or_default();
    if body.offers.is_empty() {
        return Err(ApiError::bad_request("no offers given"));
    }
    let request = document(&body.request, &reg, "request")?;
    let offers = body
        .offers
        .iter()
        .enumerate()
        .map(|(i, o)| document(o, &reg, &format!("offers[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let (_, json) = engine::rank(&request, &offers, &reg, &weights)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "type-mismatch", e.to_string()))?;
    ok("application/json", json)
}
