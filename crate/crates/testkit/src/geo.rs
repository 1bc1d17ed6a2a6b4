//! Distance oracle, brute-force linking and random linking instances.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::Rng;
use tkg_core::geo::{
    build_index, EnrichmentConfig, EnrichmentDataset, Entity, GeoPoint, SpatialIndex,
};
use tkg_core::store::{Store, UnshapedPolicy};
use tkg_core::{vocab, Quad, Term};

const R: f64 = 6_371_000.0;

/// Great-circle distance through the chord between the two points on the
/// unit sphere.
pub fn distance_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let to_xyz = |lat: f64, lon: f64| {
        let (phi, lambda) = (lat.to_radians(), lon.to_radians());
        [
            phi.cos() * lambda.cos(),
            phi.cos() * lambda.sin(),
            phi.sin(),
        ]
    };
    let (a, b) = (to_xyz(lat1, lon1), to_xyz(lat2, lon2));
    let chord = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    2.0 * R * (chord / 2.0).min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub iri: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedLink {
    pub poi: String,
    pub entity: String,
    pub distance_m: f64,
    pub walking_m: u64,
}

#[derive(Debug, Clone)]
pub struct LinkCase {
    pub pois: Vec<Site>,
    /// Target-typed POIs without coordinates.
    pub unlocated: Vec<String>,
    /// Entities per dataset id.
    pub datasets: BTreeMap<String, Vec<Site>>,
    pub radius_m: f64,
    pub max_links: usize,
    pub detour: f64,
    pub cell_deg: f64,
}

/// Quadratic scan: every POI against every entity of every dataset.
pub fn brute_force_links(case: &LinkCase) -> Vec<ExpectedLink> {
    let mut out = Vec::new();
    let mut pois = case.pois.clone();
    pois.sort_by(|a, b| a.iri.cmp(&b.iri));
    for poi in &pois {
        let mut best: BTreeMap<&str, f64> = BTreeMap::new();
        for entities in case.datasets.values() {
            for e in entities {
                let d = distance_m(poi.lat, poi.lon, e.lat, e.lon);
                if d <= case.radius_m {
                    let slot = best.entry(&e.iri).or_insert(d);
                    *slot = slot.min(d);
                }
            }
        }
        let mut ranked: Vec<(&str, f64)> = best.into_iter().collect();
        ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite").then(a.0.cmp(b.0)));
        for (entity, d) in ranked.into_iter().take(case.max_links) {
            out.push(ExpectedLink {
                poi: poi.iri.clone(),
                entity: entity.to_string(),
                distance_m: d,
                walking_m: (d * case.detour).round() as u64,
            });
        }
    }
    out
}

fn around(rng: &mut StdRng, lat: f64, lon: f64, spread_deg: f64) -> (f64, f64) {
    let lat = (lat + rng.gen_range(-spread_deg..spread_deg)).clamp(-90.0, 90.0);
    let mut lon = lon + rng.gen_range(-spread_deg..spread_deg) / lat.to_radians().cos().max(0.05);
    while lon >= 180.0 {
        lon -= 360.0;
    }
    while lon < -180.0 {
        lon += 360.0;
    }
    (lat, lon)
}

/// Random instance around a region centre; some cases sit near a pole or
/// the antimeridian.
pub fn random_case(rng: &mut StdRng, max_pois: usize, max_entities: usize) -> LinkCase {
    let (clat, clon) = match rng.gen_range(0..10) {
        0 => (rng.gen_range(84.0..89.9), rng.gen_range(-180.0..180.0)),
        1 => (rng.gen_range(-60.0..60.0), 179.99),
        _ => (rng.gen_range(47.3..54.9), rng.gen_range(6.0..15.0)),
    };
    let spread = rng.gen_range(0.005..0.3);
    let site = |prefix: &str, i: usize, rng: &mut StdRng| {
        let (lat, lon) = around(rng, clat, clon, spread);
        Site {
            iri: format!("http://ex/{prefix}/{i}"),
            lat,
            lon,
        }
    };
    let pois = (0..rng.gen_range(1..=max_pois))
        .map(|i| site("poi", i, rng))
        .collect();
    let unlocated = (0..rng.gen_range(0..3))
        .map(|i| format!("http://ex/poi/nogeo{i}"))
        .collect();
    let mut datasets = BTreeMap::new();
    let total = rng.gen_range(1..=max_entities);
    let split = rng.gen_range(0..=total);
    datasets.insert(
        "stations".to_string(),
        (0..split).map(|i| site("station", i, rng)).collect(),
    );
    datasets.insert(
        "stops".to_string(),
        (split..total).map(|i| site("stop", i, rng)).collect(),
    );
    LinkCase {
        pois,
        unlocated,
        datasets,
        radius_m: rng.gen_range(50.0..5000.0),
        max_links: rng.gen_range(1..=8),
        detour: rng.gen_range(1.0..2.0),
        cell_deg: *[0.005, 0.01, 0.05, 0.2]
            .get(rng.gen_range(0..4))
            .expect("in range"),
    }
}

/// Store holding the case's POIs in provider graph `provider`, with
/// locations as `schema:geo` blank nodes.
pub fn case_store(case: &LinkCase, provider: &str, poi_type: &str) -> Store {
    let mut store = Store::new();
    let g = store
        .register_provider(provider, UnshapedPolicy::AdmitUnshaped)
        .expect("valid id");
    let quad = |s: Term, p: &str, o: Term| Quad::new(s, Term::iri(p), o, g.clone());
    for (i, poi) in case.pois.iter().enumerate() {
        let s = Term::iri(poi.iri.as_str());
        let geo = Term::blank(format!("geo{i}"));
        for q in [
            quad(s.clone(), vocab::RDF_TYPE, Term::iri(poi_type)),
            quad(
                s.clone(),
                vocab::SCHEMA_NAME,
                Term::string(format!("POI {i}")),
            ),
            quad(s, vocab::SCHEMA_GEO, geo.clone()),
            quad(
                geo.clone(),
                vocab::SCHEMA_LATITUDE,
                Term::typed(poi.lat.to_string(), vocab::XSD_DOUBLE),
            ),
            quad(
                geo,
                vocab::SCHEMA_LONGITUDE,
                Term::typed(poi.lon.to_string(), vocab::XSD_DOUBLE),
            ),
        ] {
            store.insert(q).expect("registered graph");
        }
    }
    for iri in &case.unlocated {
        store
            .insert(quad(
                Term::iri(iri.as_str()),
                vocab::RDF_TYPE,
                Term::iri(poi_type),
            ))
            .expect("registered graph");
    }
    store
}

/// Grid indexes for the case's datasets.
pub fn case_indexes(case: &LinkCase, kind_iri: &str) -> BTreeMap<String, SpatialIndex> {
    case.datasets
        .iter()
        .map(|(id, sites)| {
            let entities = sites
                .iter()
                .map(|s| Entity {
                    iri: s.iri.clone(),
                    name: s.iri.clone(),
                    location: GeoPoint::new(s.lat, s.lon).expect("generated in range"),
                })
                .collect();
            let dataset = EnrichmentDataset::new(id, kind_iri, entities).expect("unique IRIs");
            (id.clone(), build_index(&dataset, case.cell_deg))
        })
        .collect()
}

pub fn case_config(case: &LinkCase, provider: &str, poi_type: &str) -> EnrichmentConfig {
    let ids: Vec<&str> = case.datasets.keys().map(String::as_str).collect();
    let mut config = EnrichmentConfig::new(provider, &ids, &[poi_type]);
    config.radius_meters = case.radius_m;
    config.max_links_per_poi = case.max_links;
    config.detour_factor = case.detour;
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_distances() {
        let half = distance_m(0.0, 0.0, 0.0, 180.0);
        assert!((half - std::f64::consts::PI * R).abs() < 1e-6);
        let quarter = distance_m(0.0, 0.0, 90.0, 0.0);
        assert!((quarter - std::f64::consts::FRAC_PI_2 * R).abs() < 1e-6);
    }
}
