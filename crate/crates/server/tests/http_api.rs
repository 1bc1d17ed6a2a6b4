//! HTTP endpoints exercised in-process through the router.

mod common;

use axum::body::Body;
use axum::http::{Method, StatusCode};
use common::*;
use serde_json::{json, Value};
use tkg_core::rdf::{self, is_isomorphic, Format};
use tkg_core::store::instance_closure;
use tkg_core::{vocab, Term};
use tkg_testkit::geo::distance_m;

const EVENT: &str = "http://schema.org/Event";
const POI: &str = "https://odta.io/voc/PointOfInterest";
const TRAIL: &str = "https://odta.io/voc/Trail";

async fn loaded_app() -> (Env, axum::Router) {
    let env = env_with(json!({}));
    let app = env.app();
    assert_eq!(
        ingest_file(&app, PROVIDER_BY, &http_fixture("by-batch.ttl"))
            .await
            .status,
        StatusCode::OK
    );
    assert_eq!(
        ingest_file(&app, PROVIDER_BE, &http_fixture("be-trails.ttl"))
            .await
            .status,
        StatusCode::OK
    );
    (env, app)
}

async fn sparql(
    app: &axum::Router,
    key: Option<&str>,
    query: &str,
    headers: &[(&str, &str)],
) -> Reply {
    send(
        app,
        Method::POST,
        "/sparql",
        key,
        headers,
        query.to_string(),
    )
    .await
}

fn names(hits: &Value) -> Vec<String> {
    hits.as_array()
        .unwrap()
        .iter()
        .map(|h| h["name"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn sparql_lists_events_within_limit() {
    let (_env, app) = loaded_app().await;
    let q = "PREFIX schema: <http://schema.org/>\nSELECT ?e ?name WHERE { ?e a schema:Event ; schema:name ?name } LIMIT 10";
    let reply = sparql(&app, Some(CONSUMER), q, &[]).await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.content_type(), "application/sparql-results+json");
    let body = reply.json();
    assert_eq!(body["head"]["vars"], json!(["e", "name"]));
    let rows = body["results"]["bindings"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["e"]["type"] == "uri"));
}

#[tokio::test]
async fn sparql_without_key_leaks_nothing() {
    let (_env, app) = loaded_app().await;
    let reply = sparql(&app, None, "SELECT ?s WHERE { ?s ?p ?o }", &[]).await;
    assert_eq!(reply.status, StatusCode::UNAUTHORIZED);
    assert_eq!(reply.json()["code"], "Unauthorized");
    assert!(!reply.text().contains("example.org"));
    let wrong = sparql(
        &app,
        Some("not-a-configured-key-at-all"),
        "SELECT ?s WHERE { ?s ?p ?o }",
        &[],
    )
    .await;
    assert_eq!(wrong.status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn sparql_errors_are_classified() {
    let (_env, app) = loaded_app().await;
    let grouped = sparql(
        &app,
        Some(CONSUMER),
        "SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s",
        &[],
    )
    .await;
    assert_eq!(grouped.status, StatusCode::BAD_REQUEST);
    assert_eq!(grouped.json()["code"], "UnsupportedFeature");

    let broken = sparql(&app, Some(CONSUMER), "SELECT ?s\nWHERE { ?s ?p }", &[]).await;
    assert_eq!(broken.status, StatusCode::BAD_REQUEST);
    let body = broken.json();
    assert_eq!(body["code"], "SyntaxError");
    assert_eq!(body["details"]["position"]["offset"], 24);
    assert_eq!(body["details"]["position"]["line"], 2);
    assert_eq!(body["details"]["position"]["column"], 15);

    let unbound = sparql(&app, Some(CONSUMER), "SELECT ?x WHERE { ?s ?p ?o }", &[]).await;
    assert_eq!(unbound.json()["code"], "UnboundVariable");
}

#[tokio::test]
async fn sparql_body_limit() {
    let (_env, app) = loaded_app().await;
    let padding = "#".repeat(64 * 1024);
    let query = format!("{padding}\nSELECT ?s WHERE {{ ?s ?p ?o }}");
    let reply = sparql(&app, Some(CONSUMER), &query, &[]).await;
    assert_eq!(reply.status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(reply.json()["code"], "PayloadTooLarge");
}

#[tokio::test]
async fn sparql_csv_by_accept_or_parameter() {
    let (_env, app) = loaded_app().await;
    let q = "PREFIX odta: <https://odta.io/voc/>\nPREFIX schema: <http://schema.org/>\nSELECT ?name WHERE { ?t a odta:Trail ; schema:name ?name } ORDER BY ?name";
    let expected = "name\r\nBerliner Mauerweg: Festung Spandau\r\nFestungsweg\r\nSpreeradweg\r\n";
    let by_accept = sparql(&app, Some(CONSUMER), q, &[("accept", "text/csv")]).await;
    assert!(by_accept.content_type().starts_with("text/csv"));
    assert_eq!(by_accept.text(), expected);
    let by_param = send(
        &app,
        Method::POST,
        "/sparql?format=csv",
        Some(CONSUMER),
        &[],
        q.to_string(),
    )
    .await;
    assert_eq!(by_param.text(), expected);
}

#[tokio::test]
async fn search_ranks_prefix_over_substring() {
    let (_env, app) = loaded_app().await;
    let reply = get(&app, "/search?q=fest&type=schema:Event", Some(CONSUMER)).await;
    assert_eq!(reply.status, StatusCode::OK);
    let hits = reply.json();
    assert_eq!(names(&hits), vec!["Festival X", "Oktoberfest"]);
    assert!(hits[0]["score"].as_f64() > hits[1]["score"].as_f64());
    assert_eq!(
        hits[1]["license"],
        "https://creativecommons.org/licenses/by-sa/4.0/"
    );
    assert_eq!(hits[0]["typeIris"], json!([EVENT]));
}

#[tokio::test]
async fn search_without_matches_is_empty() {
    let (_env, app) = loaded_app().await;
    let reply = get(&app, "/search?q=zzzz", Some(CONSUMER)).await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.json(), json!([]));
}

#[tokio::test]
async fn search_type_filter_matches_brute_force() {
    let (_env, app) = loaded_app().await;
    let reply = get(
        &app,
        &format!("/search?q=fest&type={}", enc(TRAIL)),
        Some(CONSUMER),
    )
    .await;
    let mut got = names(&reply.json());
    got.sort();

    let everything = get(&app, "/search?q=fest&limit=100", Some(CONSUMER))
        .await
        .json();
    let mut expected: Vec<String> = everything
        .as_array()
        .unwrap()
        .iter()
        .filter(|h| h["typeIris"].as_array().unwrap().iter().any(|t| t == TRAIL))
        .map(|h| h["name"].as_str().unwrap().to_string())
        .collect();
    expected.sort();
    assert_eq!(
        got,
        vec!["Berliner Mauerweg: Festung Spandau", "Festungsweg"]
    );
    assert_eq!(got, expected);
}

#[tokio::test]
async fn search_rejects_bad_parameters() {
    let (_env, app) = loaded_app().await;
    for uri in [
        "/search?q=",
        "/search",
        "/search?q=fest&type=nope:Thing",
        "/search?q=fest&limit=0",
        "/search?q=fest&limit=101",
    ] {
        let reply = get(&app, uri, Some(CONSUMER)).await;
        assert_eq!(reply.status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(reply.json()["code"], "BadRequest");
    }
}

#[tokio::test]
async fn search_is_deterministic() {
    let (_env, app) = loaded_app().await;
    let first = get(&app, "/search?q=e&limit=100", Some(CONSUMER))
        .await
        .body;
    for _ in 0..5 {
        assert_eq!(
            get(&app, "/search?q=e&limit=100", Some(CONSUMER))
                .await
                .body,
            first
        );
    }
}

#[tokio::test]
async fn instance_rdf_matches_describe() {
    let (_env, app) = loaded_app().await;
    let root = "http://example.org/data/marienplatz";
    let default = Term::iri(vocab::DEFAULT_GRAPH);
    let source = std::fs::read_to_string(http_fixture("by-batch.ttl")).unwrap();
    let fixture = rdf::parse(&source, Format::TurtleSubset, &default).unwrap();
    let expected = instance_closure(&Term::iri(root), &fixture);
    let mut graphs = Vec::new();
    for (name, format) in [
        ("ntriples", Format::NTriples),
        ("turtle", Format::TurtleSubset),
        ("jsonld", Format::JsonLdProfile),
    ] {
        let reply = get(
            &app,
            &format!("/instance?uri={}&format={name}", enc(root)),
            Some(CONSUMER),
        )
        .await;
        assert_eq!(reply.status, StatusCode::OK, "{name}");
        assert_eq!(reply.content_type(), format.media_type());
        graphs.push(rdf::parse(&reply.text(), format, &default).unwrap());
    }
    assert_eq!(expected.len(), 11);
    for g in &graphs {
        assert!(is_isomorphic(g, &expected));
    }
}

#[tokio::test]
async fn instance_negotiates_by_accept() {
    let (_env, app) = loaded_app().await;
    let uri = format!(
        "/instance?uri={}",
        enc("http://example.org/data/oktoberfest")
    );
    let cases = [
        ("application/n-triples", "application/n-triples"),
        (
            "text/turtle;q=0.5, application/ld+json",
            "application/ld+json",
        ),
        ("text/turtle", "text/turtle"),
        ("text/html", "text/html; charset=utf-8"),
    ];
    for (accept, expected) in cases {
        let reply = send(
            &app,
            Method::GET,
            &uri,
            Some(CONSUMER),
            &[("accept", accept)],
            Body::empty(),
        )
        .await;
        assert_eq!(reply.content_type(), expected, "{accept}");
    }
    let plain = get(&app, &uri, Some(CONSUMER)).await;
    assert!(plain.content_type().starts_with("text/html"));
}

#[tokio::test]
async fn instance_html_shows_license() {
    let (_env, app) = loaded_app().await;
    let reply = get(
        &app,
        &format!(
            "/instance?uri={}&format=html",
            enc("http://example.org/data/oktoberfest")
        ),
        Some(CONSUMER),
    )
    .await;
    let page = reply.text();
    assert!(page.contains("<h1>Oktoberfest</h1>"), "{page}");
    assert!(page.contains("https://creativecommons.org/licenses/by-sa/4.0/"));
    assert!(page.contains("schema:Event"));

    let unlicensed = get(
        &app,
        &format!(
            "/instance?uri={}",
            enc("http://example.org/data/festival-x")
        ),
        Some(CONSUMER),
    )
    .await;
    assert!(unlicensed.text().contains("No license stated."));
}

#[tokio::test]
async fn instance_errors() {
    let (_env, app) = loaded_app().await;
    let missing = get(
        &app,
        &format!("/instance?uri={}", enc("http://example.org/data/nothing")),
        Some(CONSUMER),
    )
    .await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.json()["code"], "NotFound");
    for uri in [
        "/instance",
        "/instance?uri=not%20an%20iri",
        "/instance?uri=http%3A%2F%2Fexample.org%2Fdata%2Foktoberfest&format=xml",
    ] {
        assert_eq!(
            get(&app, uri, Some(CONSUMER)).await.status,
            StatusCode::BAD_REQUEST,
            "{uri}"
        );
    }
}

#[tokio::test]
async fn ingest_reports_per_instance() {
    let env = env_with(json!({}));
    let app = env.app();
    let reply = ingest_file(&app, PROVIDER_BY, &http_fixture("mixed-batch.ttl")).await;
    assert_eq!(reply.status, StatusCode::OK);
    let report = reply.json();
    assert_eq!(
        report["accepted"],
        json!(["http://example.org/data/stadtfest"])
    );
    let rejected = report["rejected"].as_array().unwrap();
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0]["instance"], "http://example.org/data/undated");
    assert!(rejected[0]["report"].to_string().contains("startDate"));
}

#[tokio::test]
async fn ingest_authorization() {
    let env = env_with(json!({}));
    let app = env.app();
    let payload = std::fs::read(http_fixture("mixed-batch.ttl")).unwrap();
    let ttl = [("content-type", "text/turtle")];
    let cross = send(
        &app,
        Method::POST,
        "/ingest?provider=be",
        Some(PROVIDER_BY),
        &ttl,
        payload.clone(),
    )
    .await;
    assert_eq!(cross.status, StatusCode::FORBIDDEN);
    let consumer = send(
        &app,
        Method::POST,
        "/ingest",
        Some(CONSUMER),
        &ttl,
        payload.clone(),
    )
    .await;
    assert_eq!(consumer.status, StatusCode::FORBIDDEN);
    let admin_unnamed = send(
        &app,
        Method::POST,
        "/ingest",
        Some(ADMIN),
        &ttl,
        payload.clone(),
    )
    .await;
    assert_eq!(admin_unnamed.status, StatusCode::BAD_REQUEST);
    let admin = send(
        &app,
        Method::POST,
        "/ingest?provider=be",
        Some(ADMIN),
        &ttl,
        payload.clone(),
    )
    .await;
    assert_eq!(admin.status, StatusCode::OK);
    let unknown = send(
        &app,
        Method::POST,
        "/ingest?provider=nrw",
        Some(ADMIN),
        &ttl,
        payload,
    )
    .await;
    assert_eq!(unknown.status, StatusCode::NOT_FOUND);
    assert_eq!(unknown.json()["code"], "UnknownProvider");
    assert_eq!(
        get(&app, "/stats", Some(CONSUMER)).await.json(),
        json!({EVENT: 1})
    );
}

#[tokio::test]
async fn ingest_rejects_bad_payloads() {
    let env = env_with(json!({}));
    let app = env.app();
    let malformed = ingest_file(&app, PROVIDER_BY, &http_fixture("malformed.ttl")).await;
    assert_eq!(malformed.status, StatusCode::BAD_REQUEST);
    let body = malformed.json();
    assert_eq!(body["code"], "SyntaxError");
    assert_eq!(body["details"]["line"], 2);
    assert!(body["details"]["column"].as_u64().unwrap() >= 1);

    let xml = send(
        &app,
        Method::POST,
        "/ingest",
        Some(PROVIDER_BY),
        &[("content-type", "application/xml")],
        "<x/>",
    )
    .await;
    assert_eq!(xml.status, StatusCode::UNSUPPORTED_MEDIA_TYPE);
    assert_eq!(xml.json()["code"], "UnsupportedMediaType");
    assert_eq!(get(&app, "/stats", Some(CONSUMER)).await.json(), json!({}));
}

fn enrichment_body(radius: f64, detour: f64) -> String {
    json!({
        "datasetIds": ["stations"],
        "targetTypeIris": [POI],
        "radiusMeters": radius,
        "maxLinksPerPoi": 5,
        "detourFactor": detour
    })
    .to_string()
}

#[tokio::test]
async fn enrichment_config_round_trip() {
    let env = station_env();
    let app = env.app();
    let initial = get(&app, "/enrichment/config", Some(PROVIDER_BY))
        .await
        .json();
    assert_eq!(initial["radiusMeters"], 500.0);
    let json_ct = [("content-type", "application/json")];
    let put = send(
        &app,
        Method::PUT,
        "/enrichment/config",
        Some(PROVIDER_BY),
        &json_ct,
        enrichment_body(2000.0, 1.3),
    )
    .await;
    assert_eq!(put.status, StatusCode::OK);
    let after = get(&app, "/enrichment/config", Some(PROVIDER_BY))
        .await
        .json();
    assert_eq!(after["radiusMeters"], 2000.0);
    assert_eq!(after["providerId"], "by");

    let negative = send(
        &app,
        Method::PUT,
        "/enrichment/config",
        Some(PROVIDER_BY),
        &json_ct,
        enrichment_body(-5.0, 1.3),
    )
    .await;
    assert_eq!(negative.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = negative.json();
    assert_eq!(body["code"], "InvalidConfig");
    assert_eq!(body["details"]["errors"][0]["field"], "radiusMeters");

    let mut unknown: Value = serde_json::from_str(&enrichment_body(100.0, 1.3)).unwrap();
    unknown["datasetIds"] = json!(["nope"]);
    let reply = send(
        &app,
        Method::PUT,
        "/enrichment/config",
        Some(PROVIDER_BY),
        &json_ct,
        unknown.to_string(),
    )
    .await;
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);

    let mut foreign: Value = serde_json::from_str(&enrichment_body(100.0, 1.3)).unwrap();
    foreign["providerId"] = json!("be");
    let reply = send(
        &app,
        Method::PUT,
        "/enrichment/config",
        Some(PROVIDER_BY),
        &json_ct,
        foreign.to_string(),
    )
    .await;
    assert_eq!(reply.status, StatusCode::FORBIDDEN);
    assert_eq!(
        get(&app, "/enrichment/config", Some(PROVIDER_BY))
            .await
            .json()["radiusMeters"],
        2000.0
    );
}

#[tokio::test]
async fn detour_factor_scales_walking_distance() {
    let env = station_env();
    let app = env.app();
    ingest_file(&app, PROVIDER_BY, &http_fixture("by-batch.ttl")).await;
    let json_ct = [("content-type", "application/json")];
    let put = send(
        &app,
        Method::PUT,
        "/enrichment/config",
        Some(PROVIDER_BY),
        &json_ct,
        enrichment_body(500.0, 1.5),
    )
    .await;
    assert_eq!(put.status, StatusCode::OK);

    let q = "PREFIX tkg: <urn:tkg:>\nSELECT ?poi ?entity ?walk WHERE { ?poi tkg:nearby ?l . ?l tkg:entity ?entity ; tkg:walkingDistanceMeters ?walk }";
    let rows = sparql(&app, Some(CONSUMER), q, &[]).await.json()["results"]["bindings"].clone();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    let d = distance_m(48.137154, 11.576124, 48.137154, 11.577470);
    assert_eq!(
        rows[0]["poi"]["value"],
        "http://example.org/data/marienplatz"
    );
    assert_eq!(
        rows[0]["entity"]["value"],
        "http://example.org/enrichment/station-east"
    );
    assert_eq!(
        rows[0]["walk"]["value"],
        ((d * 1.5).round() as u64).to_string()
    );
}

#[tokio::test]
async fn stats_counts_typed_instances() {
    let env = env_with(json!({}));
    let app = env.app();
    assert_eq!(get(&app, "/stats", Some(CONSUMER)).await.json(), json!({}));
    ingest_file(&app, PROVIDER_BY, &http_fixture("by-batch.ttl")).await;
    assert_eq!(
        get(&app, "/stats", Some(CONSUMER)).await.json(),
        json!({EVENT: 3, POI: 2})
    );
    ingest_file(&app, PROVIDER_BE, &http_fixture("be-trails.ttl")).await;
    assert_eq!(
        get(&app, "/stats", Some(CONSUMER)).await.json(),
        json!({EVENT: 3, POI: 2, TRAIL: 3})
    );
}

#[tokio::test]
async fn every_endpoint_requires_a_key() {
    let (_env, app) = loaded_app().await;
    let cases = [
        (Method::POST, "/sparql"),
        (Method::GET, "/search?q=fest"),
        (
            Method::GET,
            "/instance?uri=http%3A%2F%2Fexample.org%2Fdata%2Foktoberfest",
        ),
        (Method::POST, "/ingest"),
        (Method::GET, "/enrichment/config"),
        (Method::PUT, "/enrichment/config"),
        (Method::GET, "/stats"),
    ];
    for (method, uri) in cases {
        let reply = send(&app, method.clone(), uri, None, &[], Body::empty()).await;
        assert_eq!(reply.status, StatusCode::UNAUTHORIZED, "{method} {uri}");
        assert_eq!(reply.json()["code"], "Unauthorized");
    }
}

#[tokio::test]
async fn widget_is_served_without_a_key() {
    let widget = tempfile::tempdir().unwrap();
    std::fs::write(
        widget.path().join("index.html"),
        "<div id=\"tkg-search\"></div>",
    )
    .unwrap();
    let env = env_with(json!({"widgetDir": widget.path()}));
    let app = env.app();
    let config = get(&app, "/widget/config.json", None).await;
    assert_eq!(config.status, StatusCode::OK);
    assert_eq!(
        config.json(),
        json!({"apiBaseUrl": "http://localhost:8080/", "defaultTypeFilters": ["schema:Event"]})
    );
    let index = get(&app, "/widget/index.html", None).await;
    assert_eq!(index.status, StatusCode::OK);
    assert!(index.text().contains("tkg-search"));
    assert_eq!(
        get(&app, "/widget/missing.js", None).await.status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&app, "/nowhere", Some(CONSUMER)).await.status,
        StatusCode::NOT_FOUND
    );

    let bare = env_with(json!({})).app();
    assert_eq!(
        get(&bare, "/widget/config.json", None).await.status,
        StatusCode::OK
    );
    assert_eq!(
        get(&bare, "/widget/index.html", None).await.status,
        StatusCode::NOT_FOUND
    );
}
