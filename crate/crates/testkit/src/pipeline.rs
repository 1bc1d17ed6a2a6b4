//! Oracles for the end-to-end fixture under `fixtures/pipeline`: the feed's
//! instances and coordinates read straight from the raw files, and the
//! listing query as an [`OracleQuery`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde_json::Value;
use tkg_core::{vocab, Term};

use crate::geo::{LinkCase, Site};
use crate::sparql::{OracleQuery, Pattern, Slot};

pub const PROVIDER: &str = "by";
pub const POI_TYPE: &str = "https://odta.io/voc/PointOfInterest";
const BASE: &str = "https://data.by.example/";

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn pipeline_dir() -> PathBuf {
    fixtures_dir().join("pipeline")
}

fn feed() -> Value {
    let text = std::fs::read_to_string(pipeline_dir().join("feed.json")).expect("feed.json");
    serde_json::from_str(&text).expect("feed.json parses")
}

fn records<'a>(feed: &'a Value, key: &str) -> &'a [Value] {
    feed[key].as_array().map(Vec::as_slice).unwrap_or_default()
}

fn has_title(record: &Value) -> bool {
    record["title"].as_str().is_some_and(|t| !t.is_empty())
}

/// Instance IRIs the shapes should admit and reject. Every feed record
/// without a title is expected to fail `minCount` on `schema:name`.
pub struct FeedExpectation {
    pub accepted: BTreeSet<String>,
    pub rejected: BTreeSet<String>,
}

pub fn feed_expectation() -> FeedExpectation {
    let feed = feed();
    let mut accepted = BTreeSet::new();
    let mut rejected = BTreeSet::new();
    for (key, kind) in [("pois", "poi"), ("trails", "trail")] {
        for r in records(&feed, key) {
            let iri = format!("{BASE}{kind}/{}", r["id"].as_str().expect("id"));
            if has_title(r) {
                accepted.insert(iri);
            } else {
                rejected.insert(iri);
            }
        }
    }
    let events = std::fs::read_to_string(pipeline_dir().join("events.csv")).expect("events.csv");
    let mut reader = csv::Reader::from_reader(events.as_bytes());
    for row in reader.records() {
        let row = row.expect("csv row");
        let iri = format!("{BASE}event/{}", &row[0]);
        if row[1].is_empty() {
            rejected.insert(iri);
        } else {
            accepted.insert(iri);
        }
    }
    FeedExpectation { accepted, rejected }
}

fn charging_sites() -> Vec<Site> {
    let text =
        std::fs::read_to_string(pipeline_dir().join("charging-stations.csv")).expect("stations");
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|row| {
            let row = row.expect("csv row");
            Site {
                iri: row[0].to_string(),
                lat: row[2].parse().expect("lat"),
                lon: row[3].parse().expect("lon"),
            }
        })
        .collect()
}

fn transit_sites() -> Vec<Site> {
    let text = std::fs::read_to_string(pipeline_dir().join("transit-stops.jsonld")).expect("stops");
    let doc: Value = serde_json::from_str(&text).expect("stops parse");
    doc.as_array()
        .expect("top-level array")
        .iter()
        .map(|n| Site {
            iri: n["@id"].as_str().expect("@id").to_string(),
            lat: n["geo"]["latitude"].as_f64().expect("latitude"),
            lon: n["geo"]["longitude"].as_f64().expect("longitude"),
        })
        .collect()
}

/// Linking case built from the raw feed and dataset files: located POIs
/// that the shapes admit, against both enrichment datasets.
pub fn feed_link_case(radius_m: f64, max_links: usize, detour: f64) -> LinkCase {
    let feed = feed();
    let pois = records(&feed, "pois")
        .iter()
        .filter(|r| has_title(r))
        .map(|r| Site {
            iri: format!("{BASE}poi/{}", r["id"].as_str().expect("id")),
            lat: r["lat"].as_f64().expect("lat"),
            lon: r["lon"].as_f64().expect("lon"),
        })
        .collect();
    let mut datasets = BTreeMap::new();
    datasets.insert("charging".to_string(), charging_sites());
    datasets.insert("transit".to_string(), transit_sites());
    LinkCase {
        pois,
        unlocated: Vec::new(),
        datasets,
        radius_m,
        max_links,
        detour,
        cell_deg: 0.01,
    }
}

/// `fixtures/pipeline/listing.rq` as a reference-evaluator query.
pub fn listing_query() -> OracleQuery {
    let var = |v: &str| Slot::Var(v.to_string());
    let iri = |i: &str| Slot::Const(Term::iri(i));
    let pattern = |s, p, o| Pattern { s, p, o };
    OracleQuery {
        select: Some(
            ["poi", "name", "entity", "walkingDistance"]
                .map(String::from)
                .to_vec(),
        ),
        required: vec![
            pattern(var("poi"), iri(vocab::RDF_TYPE), iri(POI_TYPE)),
            pattern(var("poi"), iri(vocab::SCHEMA_NAME), var("name")),
            pattern(var("poi"), iri(vocab::NEARBY), var("link")),
            pattern(var("link"), iri(vocab::LINK_ENTITY), var("entity")),
            pattern(
                var("link"),
                iri(vocab::WALKING_DISTANCE_METERS),
                var("walkingDistance"),
            ),
        ],
        order: vec![
            ("walkingDistance".to_string(), false),
            ("poi".to_string(), false),
        ],
        limit: Some(10),
        ..OracleQuery::default()
    }
}
