//! Shared setup for the server test targets: temporary configs over the
//! committed fixtures, an in-process router, and the `tkg` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tkg::api::{router, AppState};
use tkg::config::Config;
use tkg::pipeline::Pipeline;
use tower::ServiceExt;

pub const CONSUMER: &str = "consumer-key-000000001";
pub const PROVIDER_BY: &str = "provider-by-key-000001";
pub const PROVIDER_BE: &str = "provider-be-key-000001";
pub const ADMIN: &str = "admin-key-000000000001";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn http_fixture(name: &str) -> PathBuf {
    fixtures().join("http").join(name)
}

pub fn pipeline_fixture(name: &str) -> PathBuf {
    fixtures().join("pipeline").join(name)
}

/// A config in a fresh temporary directory; the snapshot lives there too.
pub struct Env {
    pub dir: TempDir,
    pub config_path: PathBuf,
}

impl Env {
    pub fn config(&self) -> Config {
        Config::load(&self.config_path).unwrap()
    }

    pub fn path(&self) -> &str {
        self.config_path.to_str().unwrap()
    }

    pub fn snapshot(&self) -> PathBuf {
        self.config().snapshot_path
    }

    pub fn app(&self) -> Router {
        let config = self.config();
        router(std::sync::Arc::new(AppState::new(
            Pipeline::open(&config).unwrap(),
            &config,
            false,
        )))
    }
}

fn keys() -> Value {
    json!([
        {"key": CONSUMER, "role": "consumer"},
        {"key": PROVIDER_BY, "role": "provider", "providerId": "by"},
        {"key": PROVIDER_BE, "role": "provider", "providerId": "be"},
        {"key": ADMIN, "role": "admin"}
    ])
}

/// Providers `by` and `be`, the domain shapes, and `extra` merged on top.
pub fn env_with(extra: Value) -> Env {
    let dir = tempfile::tempdir().unwrap();
    let mut config = json!({
        "listenAddress": "127.0.0.1:0",
        "apiKeys": keys(),
        "providers": [{"id": "by"}, {"id": "be"}],
        "shapesDir": fixtures().join("shapes"),
        "snapshotPath": "store.nq",
        "prefixes": {"ex": "http://example.org/data/"},
        "widget": {"apiBaseUrl": "http://localhost:8080/", "defaultTypeFilters": ["schema:Event"]}
    });
    for (k, v) in extra.as_object().unwrap() {
        config[k] = v.clone();
    }
    let config_path = dir.path().join("tkg.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    Env { dir, config_path }
}

/// Enrichment over `fixtures/http/stations.csv` with a 500 m radius.
pub fn station_env() -> Env {
    env_with(json!({
        "datasets": [{"id": "stations", "kindIri": "http://schema.org/ChargingStation", "path": http_fixture("stations.csv")}],
        "enrichment": [{"providerId": "by", "datasetIds": ["stations"],
                        "targetTypeIris": ["https://odta.io/voc/PointOfInterest"], "radiusMeters": 500.0}]
    }))
}

/// The end-to-end fixture: provider `by` with both Munich datasets.
pub fn pipeline_env() -> Env {
    env_with(json!({
        "datasets": [
            {"id": "charging", "kindIri": "http://schema.org/ChargingStation", "path": pipeline_fixture("charging-stations.csv")},
            {"id": "transit", "kindIri": "http://schema.org/BusStop", "path": pipeline_fixture("transit-stops.jsonld")}
        ]
    }))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    pub fn content_type(&self) -> &str {
        self.headers
            .get("content-type")
            .map(|v| v.to_str().unwrap())
            .unwrap_or("")
    }
}

pub async fn send(
    app: &Router,
    method: Method,
    uri: &str,
    key: Option<&str>,
    headers: &[(&str, &str)],
    body: impl Into<Body>,
) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(k) = key {
        req = req.header("X-API-Key", k);
    }
    for (name, value) in headers {
        req = req.header(*name, *value);
    }
    let response = app
        .clone()
        .oneshot(req.body(body.into()).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let body = response
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply {
        status,
        headers,
        body,
    }
}

pub async fn get(app: &Router, uri: &str, key: Option<&str>) -> Reply {
    send(app, Method::GET, uri, key, &[], Body::empty()).await
}

pub async fn ingest_file(app: &Router, key: &str, path: &Path) -> Reply {
    let body = std::fs::read(path).unwrap();
    send(
        app,
        Method::POST,
        "/ingest",
        Some(key),
        &[("content-type", "text/turtle")],
        body,
    )
    .await
}

pub fn enc(text: &str) -> String {
    percent_encoding::utf8_percent_encode(text, percent_encoding::NON_ALPHANUMERIC).to_string()
}

/// Runs the `tkg` binary with `TKG_CONFIG` cleared.
pub fn tkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tkg"))
        .args(args)
        .env_remove("TKG_CONFIG")
        .output()
        .unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
