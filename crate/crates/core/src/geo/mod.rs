//! Geo-linking of POIs to nearby enrichment entities such as charging
//! stations and public-transport stops.
//!
//! Distances are great-circle distances on a sphere; walking distances
//! apply a configurable detour factor. Links are written as blank link
//! nodes into the enrichment graph:
//!
//! ```text
//! <poi> <urn:tkg:nearby> _:link .
//! _:link <urn:tkg:entity> <entity> ;
//!        <urn:tkg:distanceMeters> "412"^^xsd:integer ;
//!        <urn:tkg:walkingDistanceMeters> "536"^^xsd:integer .
//! ```

mod index;

pub use index::{build_index, SpatialIndex};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{parse_jsonld_profile, Quad, Term};
use crate::store::Store;
use crate::vocab;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
pub const MAX_RADIUS_M: f64 = 50_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("coordinates ({lat}, {lon}) out of range")]
    InvalidPoint { lat: f64, lon: f64 },
    #[error("unknown dataset '{0}'")]
    UnknownDataset(String),
    #[error("unknown provider '{0}'")]
    UnknownProvider(String),
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
    #[error("entity {0} appears twice in one dataset")]
    DuplicateEntity(String),
}

/// Latitude in [-90, 90], longitude in [-180, 180).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<GeoPoint, GeoError> {
        if (-90.0..=90.0).contains(&lat) && (-180.0..180.0).contains(&lon) {
            Ok(GeoPoint { lat, lon })
        } else {
            Err(GeoError::InvalidPoint { lat, lon })
        }
    }

    pub fn lat(self) -> f64 {
        self.lat
    }

    pub fn lon(self) -> f64 {
        self.lon
    }
}

/// Haversine distance in meters.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.clamp(0.0, 1.0).sqrt().asin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub iri: String,
    pub name: String,
    pub location: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrichmentDataset {
    pub dataset_id: String,
    pub kind_iri: String,
    pub entities: Vec<Entity>,
}

impl EnrichmentDataset {
    pub fn new(
        dataset_id: &str,
        kind_iri: &str,
        entities: Vec<Entity>,
    ) -> Result<EnrichmentDataset, GeoError> {
        let mut seen = BTreeSet::new();
        for e in &entities {
            if !seen.insert(e.iri.as_str()) {
                return Err(GeoError::DuplicateEntity(e.iri.clone()));
            }
        }
        Ok(EnrichmentDataset {
            dataset_id: dataset_id.to_string(),
            kind_iri: kind_iri.to_string(),
            entities,
        })
    }

    /// CSV with header `iri,name,lat,lon`.
    pub fn from_csv(
        dataset_id: &str,
        kind_iri: &str,
        data: &[u8],
    ) -> Result<EnrichmentDataset, GeoError> {
        #[derive(Deserialize)]
        struct Row {
            iri: String,
            name: String,
            lat: f64,
            lon: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(data);
        let mut entities = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| GeoError::Dataset {
                line,
                message: e.to_string(),
            })?;
            if !crate::rdf::is_absolute_iri(&row.iri) {
                return Err(GeoError::Dataset {
                    line,
                    message: format!("'{}' is not an absolute IRI", row.iri),
                });
            }
            let location = GeoPoint::new(row.lat, row.lon).map_err(|e| GeoError::Dataset {
                line,
                message: e.to_string(),
            })?;
            entities.push(Entity {
                iri: row.iri,
                name: row.name,
                location,
            });
        }
        EnrichmentDataset::new(dataset_id, kind_iri, entities)
    }

    /// JSON-LD profile document: every IRI node with a `schema:name` and a
    /// location (directly or through `schema:geo`) becomes an entity.
    pub fn from_jsonld(
        dataset_id: &str,
        kind_iri: &str,
        text: &str,
    ) -> Result<EnrichmentDataset, GeoError> {
        let graph = parse_jsonld_profile(text, &Term::iri(vocab::DEFAULT_GRAPH)).map_err(|e| {
            GeoError::Dataset {
                line: e.position().map(|(l, _)| l).unwrap_or(0),
                message: e.to_string(),
            }
        })?;
        let mut entities = Vec::new();
        for subject in graph.subjects() {
            let Some(iri) = subject.as_iri() else {
                continue;
            };
            let name = graph
                .objects(subject, vocab::SCHEMA_NAME)
                .filter_map(|t| t.as_literal())
                .map(|l| l.lexical().to_string())
                .next();
            let location = point_of(subject, &|s, p| graph.objects(s, p).cloned().collect())
                .or_else(|| {
                    graph
                        .objects(subject, vocab::SCHEMA_GEO)
                        .find_map(|g| point_of(g, &|s, p| graph.objects(s, p).cloned().collect()))
                });
            if let (Some(name), Some(location)) = (name, location) {
                entities.push(Entity {
                    iri: iri.to_string(),
                    name,
                    location,
                });
            }
        }
        EnrichmentDataset::new(dataset_id, kind_iri, entities)
    }
}

/// Reads `schema:latitude`/`schema:longitude` numeric literals off `node`.
fn point_of(node: &Term, objects: &dyn Fn(&Term, &str) -> Vec<Term>) -> Option<GeoPoint> {
    let number = |p: &str| {
        objects(node, p)
            .iter()
            .find_map(|t| t.as_literal().and_then(|l| l.as_f64()))
    };
    GeoPoint::new(
        number(vocab::SCHEMA_LATITUDE)?,
        number(vocab::SCHEMA_LONGITUDE)?,
    )
    .ok()
}

fn default_radius() -> f64 {
    1000.0
}

fn default_max_links() -> usize {
    5
}

fn default_detour() -> f64 {
    1.3
}

/// Per-provider linking settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnrichmentConfig {
    pub provider_id: String,
    pub dataset_ids: Vec<String>,
    pub target_type_iris: Vec<String>,
    #[serde(default = "default_radius")]
    pub radius_meters: f64,
    #[serde(default = "default_max_links")]
    pub max_links_per_poi: usize,
    #[serde(default = "default_detour")]
    pub detour_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl EnrichmentConfig {
    pub fn new(
        provider_id: &str,
        dataset_ids: &[&str],
        target_type_iris: &[&str],
    ) -> EnrichmentConfig {
        EnrichmentConfig {
            provider_id: provider_id.to_string(),
            dataset_ids: dataset_ids.iter().map(|s| s.to_string()).collect(),
            target_type_iris: target_type_iris.iter().map(|s| s.to_string()).collect(),
            radius_meters: default_radius(),
            max_links_per_poi: default_max_links(),
            detour_factor: default_detour(),
        }
    }

    /// Field-level problems; empty when the config is usable.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut fail = |field: &str, message: &str| {
            errors.push(FieldError {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if !(self.radius_meters.is_finite() && self.radius_meters > 0.0) {
            fail("radiusMeters", "must be a positive number");
        } else if self.radius_meters > MAX_RADIUS_M {
            fail("radiusMeters", "must not exceed 50000");
        }
        if self.max_links_per_poi == 0 {
            fail("maxLinksPerPoi", "must be a positive integer");
        }
        if !(self.detour_factor.is_finite() && self.detour_factor >= 1.0) {
            fail("detourFactor", "must be a number >= 1");
        }
        if self
            .target_type_iris
            .iter()
            .any(|t| !crate::rdf::is_absolute_iri(t))
        {
            fail("targetTypeIris", "entries must be absolute IRIs");
        }
        errors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GeoLink {
    pub poi: String,
    pub entity: String,
    pub distance_meters: f64,
    pub walking_distance_meters: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkOutcome {
    pub links: Vec<GeoLink>,
    pub pois_considered: usize,
    /// Target-typed POIs without a usable location.
    pub pois_skipped: usize,
}

/// Target-typed POIs of the provider with their locations; unlocatable
/// POIs are returned as `None`.
pub fn provider_pois(
    store: &Store,
    provider_id: &str,
    target_types: &[String],
) -> Result<Vec<(String, Option<GeoPoint>)>, GeoError> {
    let graph = store
        .provider_graph(provider_id)
        .ok_or_else(|| GeoError::UnknownProvider(provider_id.to_string()))?;
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let mut pois = BTreeSet::new();
    for t in target_types {
        let class = Term::iri(t.as_str());
        for q in store.match_quads(None, Some(&rdf_type), Some(&class), Some(graph)) {
            if let Term::Iri(iri) = q.subject {
                pois.insert(iri);
            }
        }
    }
    let objects = |s: &Term, p: &str| -> Vec<Term> {
        let p = Term::iri(p);
        store
            .match_quads(Some(s), Some(&p), None, Some(graph))
            .map(|q| q.object)
            .collect()
    };
    Ok(pois
        .into_iter()
        .map(|iri| {
            let node = Term::iri(iri.as_str());
            let location = objects(&node, vocab::SCHEMA_GEO)
                .iter()
                .find_map(|g| point_of(g, &objects));
            (iri, location)
        })
        .collect())
}

/// Computes links for one provider's POIs against the configured datasets.
pub fn link(
    store: &Store,
    config: &EnrichmentConfig,
    indexes: &BTreeMap<String, SpatialIndex>,
) -> Result<LinkOutcome, GeoError> {
    let selected: Vec<&SpatialIndex> = config
        .dataset_ids
        .iter()
        .map(|id| {
            indexes
                .get(id)
                .ok_or_else(|| GeoError::UnknownDataset(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let pois = provider_pois(store, &config.provider_id, &config.target_type_iris)?;
    let mut outcome = LinkOutcome {
        pois_considered: pois.len(),
        ..LinkOutcome::default()
    };
    for (poi, location) in pois {
        let Some(location) = location else {
            outcome.pois_skipped += 1;
            continue;
        };
        let mut found: BTreeMap<&str, f64> = BTreeMap::new();
        for index in &selected {
            for e in index.candidates(location, config.radius_meters) {
                let d = haversine_m(location, e.location);
                if d <= config.radius_meters {
                    found
                        .entry(e.iri.as_str())
                        .and_modify(|old| *old = old.min(d))
                        .or_insert(d);
                }
            }
        }
        let mut ranked: Vec<(&str, f64)> = found.into_iter().collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(config.max_links_per_poi);
        outcome
            .links
            .extend(ranked.into_iter().map(|(entity, d)| GeoLink {
                poi: poi.clone(),
                entity: entity.to_string(),
                distance_meters: d,
                walking_distance_meters: (d * config.detour_factor).round() as u64,
            }));
    }
    Ok(outcome)
}

/// Deterministic link-node label for a (POI, entity) pair.
pub fn link_node(poi: &str, entity: &str) -> Term {
    let digest = Sha256::digest(format!("{poi}\n{entity}").as_bytes());
    let hex: String = digest.iter().take(10).map(|b| format!("{b:02x}")).collect();
    Term::blank(format!("g{hex}"))
}

/// The four enrichment-graph quads describing one link. The distance
/// literal is capped at `floor(radius)` so that rounding never advertises
/// a distance beyond the configured radius.
pub fn link_quads(link: &GeoLink, radius_meters: f64) -> [Quad; 4] {
    let g = Term::iri(vocab::ENRICHMENT_GRAPH);
    let node = link_node(&link.poi, &link.entity);
    let distance = (link.distance_meters.round()).min(radius_meters.floor()) as i64;
    [
        Quad::new(
            Term::iri(link.poi.as_str()),
            Term::iri(vocab::NEARBY),
            node.clone(),
            g.clone(),
        ),
        Quad::new(
            node.clone(),
            Term::iri(vocab::LINK_ENTITY),
            Term::iri(link.entity.as_str()),
            g.clone(),
        ),
        Quad::new(
            node.clone(),
            Term::iri(vocab::DISTANCE_METERS),
            Term::integer(distance),
            g.clone(),
        ),
        Quad::new(
            node,
            Term::iri(vocab::WALKING_DISTANCE_METERS),
            Term::integer(link.walking_distance_meters as i64),
            g,
        ),
    ]
}

/// Writes links into the enrichment graph; returns quads written.
pub fn materialize(store: &mut Store, links: &[GeoLink], radius_meters: f64) -> usize {
    let mut written = 0;
    for link in links {
        for q in link_quads(link, radius_meters) {
            if store
                .insert(q)
                .expect("enrichment graph is always writable")
            {
                written += 1;
            }
        }
    }
    written
}

/// Removes the link nodes of every instance in the provider's graph, plus
/// link nodes no longer referenced by any `urn:tkg:nearby` quad. Returns
/// quads removed.
pub fn clear_provider_links(store: &mut Store, provider_id: &str) -> Result<usize, GeoError> {
    let graph = store
        .provider_graph(provider_id)
        .cloned()
        .ok_or_else(|| GeoError::UnknownProvider(provider_id.to_string()))?;
    let enrichment = Term::iri(vocab::ENRICHMENT_GRAPH);
    let nearby = Term::iri(vocab::NEARBY);
    let instances: BTreeSet<Term> = store
        .match_quads(None, None, None, Some(&graph))
        .map(|q| q.subject)
        .filter(Term::is_iri)
        .collect();
    let mut doomed = Vec::new();
    for poi in &instances {
        for q in store.match_quads(Some(poi), Some(&nearby), None, Some(&enrichment)) {
            doomed.extend(store.match_quads(Some(&q.object), None, None, Some(&enrichment)));
            doomed.push(q);
        }
    }
    let referenced: BTreeSet<Term> = store
        .match_quads(None, Some(&nearby), None, Some(&enrichment))
        .map(|q| q.object)
        .collect();
    let link_entity = Term::iri(vocab::LINK_ENTITY);
    for q in store.match_quads(None, Some(&link_entity), None, Some(&enrichment)) {
        if q.subject.is_blank() && !referenced.contains(&q.subject) {
            doomed.extend(store.match_quads(Some(&q.subject), None, None, Some(&enrichment)));
        }
    }
    Ok(doomed.iter().filter(|q| store.remove(q)).count())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnrichmentRun {
    pub provider_id: String,
    pub links: usize,
    pub pois_considered: usize,
    pub pois_skipped: usize,
    pub quads_removed: usize,
    pub quads_written: usize,
}

/// Refreshes one provider's enrichment: link, clear old links, write new.
pub fn enrich_provider(
    store: &mut Store,
    config: &EnrichmentConfig,
    indexes: &BTreeMap<String, SpatialIndex>,
) -> Result<EnrichmentRun, GeoError> {
    let outcome = link(store, config, indexes)?;
    let quads_removed = clear_provider_links(store, &config.provider_id)?;
    let quads_written = materialize(store, &outcome.links, config.radius_meters);
    Ok(EnrichmentRun {
        provider_id: config.provider_id.clone(),
        links: outcome.links.len(),
        pois_considered: outcome.pois_considered,
        pois_skipped: outcome.pois_skipped,
        quads_removed,
        quads_written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::UnshapedPolicy;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn haversine_basics() {
        assert_eq!(haversine_m(p(48.1, 11.5), p(48.1, 11.5)), 0.0);
        let half = haversine_m(p(0.0, 0.0), p(0.0, 179.999999999));
        assert!(
            (half - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 1.0,
            "{half}"
        );
        assert!(GeoPoint::new(0.0, 180.0).is_err());
        assert!(GeoPoint::new(90.1, 0.0).is_err());
    }

    #[test]
    fn same_cell() {
        let ds = EnrichmentDataset::from_csv(
            "ds",
            "http://ex/Station",
            b"iri,name,lat,lon\nhttp://ex/s1,A,48.0001,11.0001\nhttp://ex/s2,B,48.0011,11.0011\n",
        )
        .unwrap();
        assert_eq!(build_index(&ds, 0.01).cell_count(), 1);
        let empty = EnrichmentDataset::new("e", "http://ex/K", vec![]).unwrap();
        assert_eq!(build_index(&empty, 0.01).cell_count(), 0);
    }

    #[test]
    fn dataset_errors() {
        assert!(matches!(
            EnrichmentDataset::from_csv(
                "d",
                "http://ex/K",
                b"iri,name,lat,lon\nhttp://ex/a,A,91,0\n"
            ),
            Err(GeoError::Dataset { line: 2, .. })
        ));
        assert!(matches!(
            EnrichmentDataset::from_csv(
                "d",
                "http://ex/K",
                b"iri,name,lat,lon\nhttp://ex/a,A,1,0\nhttp://ex/a,B,1,0\n"
            ),
            Err(GeoError::DuplicateEntity(_))
        ));
    }

    #[test]
    fn jsonld_dataset() {
        let text = r#"[
            {"@context": {"@vocab": "http://schema.org/"}, "@id": "http://ex/s1", "name": "Ladepunkt",
             "geo": {"latitude": 48.0, "longitude": 11.0}},
            {"@context": {"@vocab": "http://schema.org/"}, "@id": "http://ex/s2", "name": "Halt", "latitude": 48.5, "longitude": 11.5},
            {"@context": {"@vocab": "http://schema.org/"}, "@id": "http://ex/s3", "name": "Nowhere"}
        ]"#;
        let ds = EnrichmentDataset::from_jsonld("d", "http://ex/K", text).unwrap();
        assert_eq!(ds.entities.len(), 2);
    }

    #[test]
    fn config_validation() {
        let mut c = EnrichmentConfig::new("by", &["ds"], &["http://schema.org/Place"]);
        assert!(c.validate().is_empty());
        c.radius_meters = 60_000.0;
        c.max_links_per_poi = 0;
        c.detour_factor = 0.5;
        let fields: Vec<String> = c.validate().into_iter().map(|e| e.field).collect();
        assert_eq!(
            fields,
            vec!["radiusMeters", "maxLinksPerPoi", "detourFactor"]
        );
        let parsed: EnrichmentConfig =
            serde_json::from_str(r#"{"providerId":"by","datasetIds":["ds"],"targetTypeIris":[]}"#)
                .unwrap();
        assert_eq!(parsed.radius_meters, 1000.0);
        assert_eq!(parsed.max_links_per_poi, 5);
        assert_eq!(parsed.detour_factor, 1.3);
    }

    fn poi_store(pois: &[(&str, f64, f64)]) -> Store {
        let mut store = Store::new();
        let g = store
            .register_provider("by", UnshapedPolicy::AdmitUnshaped)
            .unwrap();
        for (i, (iri, lat, lon)) in pois.iter().enumerate() {
            let s = Term::iri(*iri);
            let geo = Term::blank(format!("geo{i}"));
            let quads = [
                Quad::new(
                    s.clone(),
                    Term::iri(vocab::RDF_TYPE),
                    Term::iri("http://schema.org/Place"),
                    g.clone(),
                ),
                Quad::new(s, Term::iri(vocab::SCHEMA_GEO), geo.clone(), g.clone()),
                Quad::new(
                    geo.clone(),
                    Term::iri(vocab::SCHEMA_LATITUDE),
                    Term::typed(lat.to_string(), vocab::XSD_DOUBLE),
                    g.clone(),
                ),
                Quad::new(
                    geo,
                    Term::iri(vocab::SCHEMA_LONGITUDE),
                    Term::typed(lon.to_string(), vocab::XSD_DOUBLE),
                    g.clone(),
                ),
            ];
            for q in quads {
                store.insert(q).unwrap();
            }
        }
        store
    }

    fn indexes(entities: Vec<Entity>) -> BTreeMap<String, SpatialIndex> {
        let ds = EnrichmentDataset::new("ds", "http://ex/Station", entities).unwrap();
        BTreeMap::from([("ds".to_string(), build_index(&ds, 0.05))])
    }

    fn station(i: usize, lat: f64, lon: f64) -> Entity {
        Entity {
            iri: format!("http://ex/station/{i}"),
            name: format!("S{i}"),
            location: p(lat, lon),
        }
    }

    #[test]
    fn keeps_nearest_with_iri_tie_break() {
        let store = poi_store(&[("http://ex/poi", 48.0, 11.0)]);
        let entities: Vec<Entity> = (0..7)
            .map(|i| station(6 - i, 48.0 + 0.0005 * (i / 2) as f64, 11.0))
            .collect();
        let cfg = EnrichmentConfig::new("by", &["ds"], &["http://schema.org/Place"]);
        let out = link(&store, &cfg, &indexes(entities)).unwrap();
        let got: Vec<&str> = out.links.iter().map(|l| l.entity.as_str()).collect();
        assert_eq!(
            got,
            vec![
                "http://ex/station/5",
                "http://ex/station/6",
                "http://ex/station/3",
                "http://ex/station/4",
                "http://ex/station/1"
            ]
        );
    }

    #[test]
    fn materialize_and_refresh_are_idempotent() {
        let mut store = poi_store(&[("http://ex/poi", 48.0, 11.0)]);
        let cfg = EnrichmentConfig::new("by", &["ds"], &["http://schema.org/Place"]);
        let idx = indexes(vec![station(1, 48.0, 11.001)]);
        let run = enrich_provider(&mut store, &cfg, &idx).unwrap();
        assert_eq!(run.quads_written, 4);
        let state = store.dump();
        enrich_provider(&mut store, &cfg, &idx).unwrap();
        assert_eq!(store.dump(), state);
        assert_eq!(materialize(&mut Store::new(), &[], 1000.0), 0);
    }

    #[test]
    fn orphaned_links_are_collected() {
        let mut store = poi_store(&[("http://ex/poi", 48.0, 11.0)]);
        let cfg = EnrichmentConfig::new("by", &["ds"], &["http://schema.org/Place"]);
        let idx = indexes(vec![station(1, 48.0, 11.001)]);
        enrich_provider(&mut store, &cfg, &idx).unwrap();
        assert_eq!(store.remove_instance("by", "http://ex/poi").unwrap(), 5);
        let removed = clear_provider_links(&mut store, "by").unwrap();
        assert_eq!(removed, 3);
        assert!(store.graph(&Term::iri(vocab::ENRICHMENT_GRAPH)).is_empty());
    }

    #[test]
    fn unknown_names() {
        let store = poi_store(&[]);
        let mut cfg = EnrichmentConfig::new("by", &["nope"], &[]);
        assert_eq!(
            link(&store, &cfg, &BTreeMap::new()),
            Err(GeoError::UnknownDataset("nope".into()))
        );
        cfg.provider_id = "zz".into();
        cfg.dataset_ids.clear();
        assert_eq!(
            link(&store, &cfg, &BTreeMap::new()),
            Err(GeoError::UnknownProvider("zz".into()))
        );
    }

    #[test]
    fn distance_literal_capped_at_radius() {
        let link = GeoLink {
            poi: "http://ex/p".into(),
            entity: "http://ex/e".into(),
            distance_meters: 100.55,
            walking_distance_meters: 131,
        };
        let quads = link_quads(&link, 100.6);
        assert_eq!(quads[2].object, Term::integer(100));
    }
}
