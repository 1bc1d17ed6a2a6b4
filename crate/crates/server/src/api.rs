//! HTTP surface: `/sparql`, `/search`, `/instance`, `/ingest`,
//! `/enrichment/config`, `/stats` and the static `/widget/` bundle.
//!
//! Every endpoint except `/widget/` requires an `X-API-Key` header. Errors
//! are JSON bodies `{code, message, details?}`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::extract::{FromRequestParts, Path, Query, Request, State};
use axum::http::header::{ACCEPT, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tkg_core::geo::EnrichmentConfig;
use tkg_core::rdf::{self, Format};
use tkg_core::sparql::{results_to_csv, results_to_json, QueryError};
use tkg_core::store::StoreError;
use tkg_core::{vocab, Term};
use tokio::sync::RwLock;
use tower::ServiceExt;
use tower_http::services::ServeDir;

use crate::config::{ApiKey, Config, Role, WidgetConfig};
use crate::html::render_instance;
use crate::pipeline::{Pipeline, PipelineError};

pub const API_KEY_HEADER: &str = "x-api-key";
pub const SPARQL_BODY_LIMIT: usize = 64 * 1024;
pub const INGEST_BODY_LIMIT: usize = 32 * 1024 * 1024;
const SEARCH_DEFAULT_LIMIT: usize = 20;
const SEARCH_MAX_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    fn with_details(mut self, details: Value) -> ApiError {
        self.details = Some(details);
        self
    }

    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    fn forbidden(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::FORBIDDEN, "Forbidden", message)
    }

    fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"code": self.code, "message": self.message});
        if let Some(d) = self.details {
            body["details"] = d;
        }
        (self.status, Json(body)).into_response()
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    (line, column)
}

fn query_error(err: QueryError, text: &str) -> ApiError {
    let message = err.to_string();
    match err {
        QueryError::Syntax { position, .. } => {
            let (line, column) = line_column(text, position);
            ApiError::new(StatusCode::BAD_REQUEST, "SyntaxError", message).with_details(
                json!({"position": {"offset": position, "line": line, "column": column}}),
            )
        }
        QueryError::UnsupportedFeature { .. } => {
            ApiError::new(StatusCode::BAD_REQUEST, "UnsupportedFeature", message)
        }
        QueryError::UnboundVariable { .. } => {
            ApiError::new(StatusCode::BAD_REQUEST, "UnboundVariable", message)
        }
        QueryError::QueryTooExpensive { .. } => {
            ApiError::new(StatusCode::BAD_REQUEST, "QueryTooExpensive", message)
        }
    }
}

fn pipeline_error(err: PipelineError) -> ApiError {
    match err {
        PipelineError::UnknownProvider(id) => ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownProvider",
            format!("unknown provider '{id}'"),
        ),
        PipelineError::InvalidEnrichment(errors) => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "InvalidConfig",
            "enrichment config violates its invariants",
        )
        .with_details(json!({ "errors": errors })),
        PipelineError::Store(StoreError::Syntax(e)) => {
            let mut err = ApiError::new(StatusCode::BAD_REQUEST, "SyntaxError", e.to_string());
            if let Some((line, column)) = e.position() {
                err = err.with_details(json!({"line": line, "column": column}));
            }
            err
        }
        PipelineError::Store(StoreError::Encoding) => ApiError::bad_request("payload is not UTF-8"),
        other => ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "Internal",
            other.to_string(),
        ),
    }
}

pub struct AppState {
    pipeline: RwLock<Pipeline>,
    keys: HashMap<String, ApiKey>,
    widget: WidgetConfig,
    widget_dir: Option<PathBuf>,
    persist: bool,
}

impl AppState {
    /// `persist` writes the snapshot after every successful write request.
    pub fn new(pipeline: Pipeline, config: &Config, persist: bool) -> AppState {
        AppState {
            pipeline: RwLock::new(pipeline),
            keys: config
                .api_keys
                .iter()
                .map(|k| (k.key.clone(), k.clone()))
                .collect(),
            widget: config.widget.clone(),
            widget_dir: config.widget_dir.clone(),
            persist,
        }
    }

    async fn persist(&self, pipeline: &Pipeline) -> Result<(), ApiError> {
        if self.persist {
            pipeline.save().map_err(pipeline_error)?;
        }
        Ok(())
    }
}

/// The authenticated caller.
#[derive(Debug, Clone)]
pub struct Caller(ApiKey);

impl Caller {
    /// The provider a write request acts for: a provider key's own id
    /// (any other `requested` id is refused), or the id an admin names.
    fn acting_provider(&self, requested: Option<&str>) -> Result<String, ApiError> {
        match (self.0.role, self.0.provider_id.as_deref(), requested) {
            (Role::Provider, Some(own), None) => Ok(own.to_string()),
            (Role::Provider, Some(own), Some(req)) if own == req => Ok(own.to_string()),
            (Role::Provider, _, Some(req)) => Err(ApiError::forbidden(format!(
                "this key may not act for provider '{req}'"
            ))),
            (Role::Admin, _, Some(req)) => Ok(req.to_string()),
            (Role::Admin, _, None) => {
                Err(ApiError::bad_request("admin requests must name a provider"))
            }
            _ => Err(ApiError::forbidden("a provider or admin key is required")),
        }
    }
}

impl FromRequestParts<Arc<AppState>> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(
        parts: &mut Parts,
        state: &Arc<AppState>,
    ) -> Result<Self, Self::Rejection> {
        parts
            .headers
            .get(API_KEY_HEADER)
            .and_then(|v| v.to_str().ok())
            .and_then(|k| state.keys.get(k))
            .map(|k| Caller(k.clone()))
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::UNAUTHORIZED,
                    "Unauthorized",
                    "missing or invalid X-API-Key",
                )
            })
    }
}

fn params<T>(
    query: Result<Query<T>, axum::extract::rejection::QueryRejection>,
) -> Result<T, ApiError> {
    query
        .map(|Query(q)| q)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn read_body(body: Body, limit: usize) -> Result<Vec<u8>, ApiError> {
    to_bytes(body, limit)
        .await
        .map(|b| b.to_vec())
        .map_err(|_| {
            ApiError::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "PayloadTooLarge",
                format!("request body exceeds {limit} bytes"),
            )
        })
}

fn with_content_type(body: impl Into<Body>, content_type: &'static str) -> Response {
    let mut response = Response::new(body.into());
    response
        .headers_mut()
        .insert(CONTENT_TYPE, HeaderValue::from_static(content_type));
    response
}

/// Media types of `Accept`, highest quality first.
fn accepted(headers: &HeaderMap) -> Vec<String> {
    let Some(accept) = headers.get(ACCEPT).and_then(|v| v.to_str().ok()) else {
        return Vec::new();
    };
    let mut entries: Vec<(f32, usize, String)> = accept
        .split(',')
        .enumerate()
        .filter_map(|(i, part)| {
            let mut pieces = part.split(';');
            let media = pieces.next()?.trim().to_ascii_lowercase();
            let q = pieces
                .filter_map(|p| p.trim().strip_prefix("q="))
                .find_map(|q| q.parse::<f32>().ok())
                .unwrap_or(1.0);
            (q > 0.0 && !media.is_empty()).then_some((q, i, media))
        })
        .collect();
    entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    entries.into_iter().map(|(_, _, m)| m).collect()
}

#[derive(Debug, Deserialize)]
struct SparqlParams {
    format: Option<String>,
}

async fn sparql(
    State(state): State<Arc<AppState>>,
    _caller: Caller,
    query: Result<Query<SparqlParams>, axum::extract::rejection::QueryRejection>,
    headers: HeaderMap,
    body: Body,
) -> Result<Response, ApiError> {
    let params = params(query)?;
    let bytes = read_body(body, SPARQL_BODY_LIMIT).await?;
    let text = String::from_utf8(bytes).map_err(|_| ApiError::bad_request("query is not UTF-8"))?;
    let csv = match params.format.as_deref() {
        Some("csv") => true,
        Some("json") => false,
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown format '{other}': use json or csv"
            )))
        }
        None => accepted(&headers)
            .iter()
            .find_map(|m| match m.as_str() {
                "text/csv" => Some(true),
                "application/sparql-results+json" | "application/json" => Some(false),
                _ => None,
            })
            .unwrap_or(false),
    };
    let results = state
        .pipeline
        .read()
        .await
        .query(&text)
        .map_err(|e| query_error(e, &text))?;
    Ok(if csv {
        with_content_type(results_to_csv(&results), "text/csv; charset=utf-8")
    } else {
        with_content_type(results_to_json(&results), "application/sparql-results+json")
    })
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
    #[serde(rename = "type")]
    type_filter: Option<String>,
    limit: Option<String>,
}

async fn search(
    State(state): State<Arc<AppState>>,
    _caller: Caller,
    query: Result<Query<SearchParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let params = params(query)?;
    let q = params.q.as_deref().map(str::trim).unwrap_or("");
    if q.is_empty() {
        return Err(ApiError::bad_request("q must not be empty"));
    }
    let limit = match params.limit.as_deref() {
        None => SEARCH_DEFAULT_LIMIT,
        Some(raw) => match raw.parse::<usize>() {
            Ok(n) if (1..=SEARCH_MAX_LIMIT).contains(&n) => n,
            _ => {
                return Err(ApiError::bad_request(format!(
                    "limit must be an integer from 1 to {SEARCH_MAX_LIMIT}"
                )))
            }
        },
    };
    let pipeline = state.pipeline.read().await;
    let type_iri = match params
        .type_filter
        .as_deref()
        .filter(|t| !t.trim().is_empty())
    {
        Some(t) => Some(pipeline.expand_iri(t).map_err(ApiError::bad_request)?),
        None => None,
    };
    Ok(Json(pipeline.search(q, type_iri.as_deref(), limit)).into_response())
}

#[derive(Debug, Deserialize)]
struct InstanceParams {
    uri: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Depiction {
    Html,
    Rdf(Format),
}

fn depiction(format: Option<&str>, headers: &HeaderMap) -> Result<Depiction, ApiError> {
    if let Some(name) = format {
        return match name {
            "html" => Ok(Depiction::Html),
            "ntriples" | "turtle" | "jsonld" => {
                Ok(Depiction::Rdf(Format::from_name(name).expect("known name")))
            }
            other => Err(ApiError::bad_request(format!(
                "unknown format '{other}': use html, ntriples, turtle or jsonld"
            ))),
        };
    }
    for media in accepted(headers) {
        match media.as_str() {
            "text/html" | "application/xhtml+xml" | "*/*" | "text/*" => return Ok(Depiction::Html),
            "application/n-triples" => return Ok(Depiction::Rdf(Format::NTriples)),
            "text/turtle" => return Ok(Depiction::Rdf(Format::TurtleSubset)),
            "application/ld+json" => return Ok(Depiction::Rdf(Format::JsonLdProfile)),
            _ => {}
        }
    }
    Ok(Depiction::Html)
}

async fn instance(
    State(state): State<Arc<AppState>>,
    _caller: Caller,
    query: Result<Query<InstanceParams>, axum::extract::rejection::QueryRejection>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let params = params(query)?;
    let uri = params.uri.as_deref().unwrap_or("");
    if !rdf::is_absolute_iri(uri) {
        return Err(ApiError::bad_request("uri must be an absolute IRI"));
    }
    let wanted = depiction(params.format.as_deref(), &headers)?;
    let pipeline = state.pipeline.read().await;
    let described = pipeline
        .describe(uri)
        .ok_or_else(|| ApiError::not_found(format!("no stored instance <{uri}>")))?;
    Ok(match wanted {
        Depiction::Html => {
            let page = render_instance(
                uri,
                &described,
                pipeline.store().license(uri),
                pipeline.prefixes(),
            );
            with_content_type(page, "text/html; charset=utf-8")
        }
        Depiction::Rdf(format) => {
            let triples = described.retagged(&Term::iri(vocab::DEFAULT_GRAPH));
            with_content_type(rdf::serialize(&triples, format), format.media_type())
        }
    })
}

#[derive(Debug, Deserialize)]
struct ProviderParams {
    provider: Option<String>,
}

async fn ingest(
    State(state): State<Arc<AppState>>,
    caller: Caller,
    query: Result<Query<ProviderParams>, axum::extract::rejection::QueryRejection>,
    headers: HeaderMap,
    body: Body,
) -> Result<Response, ApiError> {
    let provider = caller.acting_provider(params(query)?.provider.as_deref())?;
    let media = headers
        .get(CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    let format = Format::from_media_type(media).ok_or_else(|| {
        ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            "UnsupportedMediaType",
            "Content-Type must be application/n-triples, text/turtle or application/ld+json",
        )
    })?;
    let payload = read_body(body, INGEST_BODY_LIMIT).await?;
    let mut pipeline = state.pipeline.write().await;
    let (report, _) = pipeline
        .ingest(&provider, format, payload)
        .map_err(pipeline_error)?;
    state.persist(&pipeline).await?;
    Ok(Json(report).into_response())
}

async fn get_enrichment(
    State(state): State<Arc<AppState>>,
    caller: Caller,
    query: Result<Query<ProviderParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let provider = caller.acting_provider(params(query)?.provider.as_deref())?;
    let config = state
        .pipeline
        .read()
        .await
        .enrichment_config(&provider)
        .map_err(pipeline_error)?;
    Ok(Json(config).into_response())
}

async fn put_enrichment(
    State(state): State<Arc<AppState>>,
    caller: Caller,
    query: Result<Query<ProviderParams>, axum::extract::rejection::QueryRejection>,
    body: Body,
) -> Result<Response, ApiError> {
    let requested = params(query)?.provider;
    let bytes = read_body(body, SPARQL_BODY_LIMIT).await?;
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| ApiError::bad_request(format!("body is not JSON: {e}")))?;
    let named = value
        .get("providerId")
        .and_then(Value::as_str)
        .map(str::to_string);
    let provider = caller.acting_provider(requested.as_deref().or(named.as_deref()))?;
    if named.as_deref().is_some_and(|n| n != provider) {
        return Err(ApiError::forbidden(
            "providerId in the body differs from the acting provider",
        ));
    }
    let mut value = value;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("providerId".into(), Value::String(provider));
    }
    let config: EnrichmentConfig = serde_json::from_value(value).map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "InvalidConfig",
            e.to_string(),
        )
        .with_details(json!({"errors": [{"field": "", "message": e.to_string()}]}))
    })?;
    let mut pipeline = state.pipeline.write().await;
    pipeline
        .set_enrichment_config(config.clone())
        .map_err(pipeline_error)?;
    state.persist(&pipeline).await?;
    Ok(Json(config).into_response())
}

async fn stats(State(state): State<Arc<AppState>>, _caller: Caller) -> Response {
    Json(state.pipeline.read().await.stats()).into_response()
}

async fn widget_config(State(state): State<Arc<AppState>>) -> Response {
    Json(state.widget.clone()).into_response()
}

async fn widget_file(
    State(state): State<Arc<AppState>>,
    path: Option<Path<String>>,
    request: Request,
) -> Response {
    let rel = path.map(|Path(p)| p).unwrap_or_default();
    if rel == "config.json" {
        return widget_config(State(state)).await;
    }
    let Some(dir) = state.widget_dir.clone() else {
        return ApiError::not_found("no widget bundle is configured").into_response();
    };
    let (mut parts, body) = request.into_parts();
    parts.uri = format!("/{rel}")
        .parse::<Uri>()
        .unwrap_or_else(|_| Uri::from_static("/"));
    match ServeDir::new(dir)
        .oneshot(Request::from_parts(parts, body))
        .await
    {
        Ok(response) if response.status() == StatusCode::NOT_FOUND => {
            ApiError::not_found(format!("no widget file '{rel}'")).into_response()
        }
        Ok(response) => response.map(Body::new),
        Err(never) => match never {},
    }
}

async fn fallback(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no endpoint {}", uri.path()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sparql", post(sparql))
        .route("/search", get(search))
        .route("/instance", get(instance))
        .route("/ingest", post(ingest))
        .route(
            "/enrichment/config",
            get(get_enrichment).put(put_enrichment),
        )
        .route("/stats", get(stats))
        .route("/widget", get(widget_file))
        .route("/widget/", get(widget_file))
        .route("/widget/{*path}", get(widget_file))
        .fallback(fallback)
        .layer(axum::extract::DefaultBodyLimit::disable())
        .with_state(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accept_order_respects_quality() {
        let mut h = HeaderMap::new();
        h.insert(
            ACCEPT,
            HeaderValue::from_static("text/html;q=0.5, text/turtle, application/ld+json;q=0.9"),
        );
        assert_eq!(
            accepted(&h),
            ["text/turtle", "application/ld+json", "text/html"]
        );
        assert_eq!(
            depiction(None, &h).unwrap(),
            Depiction::Rdf(Format::TurtleSubset)
        );
        assert_eq!(depiction(Some("html"), &h).unwrap(), Depiction::Html);
        assert!(depiction(Some("rdfxml"), &h).is_err());
        assert_eq!(depiction(None, &HeaderMap::new()).unwrap(), Depiction::Html);
    }

    #[test]
    fn offsets_become_line_and_column() {
        assert_eq!(line_column("SELECT\n  ?x WHERE", 9), (2, 3));
        assert_eq!(line_column("abc", 0), (1, 1));
    }

    #[test]
    fn provider_resolution() {
        let key = |role, provider: Option<&str>| {
            Caller(ApiKey {
                key: "0123456789abcdef".into(),
                role,
                provider_id: provider.map(str::to_string),
            })
        };
        let by = key(Role::Provider, Some("by"));
        assert_eq!(by.acting_provider(None).unwrap(), "by");
        assert_eq!(by.acting_provider(Some("by")).unwrap(), "by");
        assert_eq!(
            by.acting_provider(Some("be")).unwrap_err().status,
            StatusCode::FORBIDDEN
        );
        let admin = key(Role::Admin, None);
        assert_eq!(admin.acting_provider(Some("be")).unwrap(), "be");
        assert_eq!(
            admin.acting_provider(None).unwrap_err().status,
            StatusCode::BAD_REQUEST
        );
        assert_eq!(
            key(Role::Consumer, None)
                .acting_provider(Some("by"))
                .unwrap_err()
                .status,
            StatusCode::FORBIDDEN
        );
    }
}
