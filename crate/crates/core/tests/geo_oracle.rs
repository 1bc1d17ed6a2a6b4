//! Geo-linking against a quadratic scan with an independent distance formula.

use std::collections::BTreeSet;
use std::time::Instant;

use proptest::prelude::*;
use tkg_core::geo::{
    build_index, enrich_provider, haversine_m, link, EnrichmentDataset, Entity, GeoPoint,
};
use tkg_core::{vocab, Term};
use tkg_testkit::geo::{
    brute_force_links, case_config, case_indexes, case_store, distance_m, random_case, LinkCase,
    Site,
};
use tkg_testkit::rng;

const POI: &str = "https://odta.io/voc/PointOfInterest";
const STATION: &str = "https://example.org/ChargingStation";

fn pt(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(lat, lon).unwrap()
}

#[test]
fn munich_to_berlin() {
    let d = haversine_m(pt(48.1372, 11.5756), pt(52.5186, 13.4083));
    let oracle = distance_m(48.1372, 11.5756, 52.5186, 13.4083);
    assert!((d - oracle).abs() <= 0.5, "{d} vs {oracle}");
    assert!((d / 1000.0 - 504.0).abs() < 2.0, "{d}");
}

#[test]
fn half_great_circle() {
    let d = haversine_m(pt(0.0, 0.0), pt(0.0, -180.0));
    assert!((d - 20_015_086.796).abs() < 1.0, "{d}");
}

#[test]
fn fifty_random_instances_match_brute_force() {
    let started = Instant::now();
    let mut total_links = 0;
    for case_no in 0..50 {
        let case = random_case(&mut rng("geo-oracle", case_no), 500, 500);
        let store = case_store(&case, "by", POI);
        let outcome = link(
            &store,
            &case_config(&case, "by", POI),
            &case_indexes(&case, STATION),
        )
        .unwrap();
        let want = brute_force_links(&case);
        assert_eq!(outcome.pois_skipped, case.unlocated.len());
        assert_eq!(outcome.links.len(), want.len(), "case {case_no}");
        for (got, want) in outcome.links.iter().zip(&want) {
            assert_eq!(
                (&got.poi, &got.entity),
                (&want.poi, &want.entity),
                "case {case_no}"
            );
            assert!(
                (got.distance_meters - want.distance_m).abs() < 1e-6,
                "case {case_no}"
            );
            assert_eq!(
                got.walking_distance_meters, want.walking_m,
                "case {case_no}"
            );
            assert_eq!(
                got.walking_distance_meters,
                (want.distance_m * case.detour).round() as u64
            );
        }
        total_links += want.len();
    }
    assert!(total_links > 1000, "workload too sparse: {total_links}");
    assert!(
        started.elapsed().as_secs() < 60,
        "took {:?}",
        started.elapsed()
    );
}

#[test]
fn candidates_cover_every_in_radius_entity() {
    let mut r = rng("geo-candidates", 0);
    let case = random_case(&mut r, 1, 1000);
    let entities: Vec<Entity> = case
        .datasets
        .values()
        .flatten()
        .map(|s| Entity {
            iri: s.iri.clone(),
            name: String::new(),
            location: pt(s.lat, s.lon),
        })
        .collect();
    let dataset = EnrichmentDataset::new("all", STATION, entities.clone()).unwrap();
    for (q, cell) in (0..100).zip([0.003, 0.01, 0.05].iter().cycle()) {
        let index = build_index(&dataset, *cell);
        let probe = random_case(&mut rng("geo-probe", q), 1, 1);
        let centre = &case.pois[0];
        let site = &probe.pois[0];
        let (lat, lon) = if q % 2 == 0 {
            (centre.lat, centre.lon)
        } else {
            (site.lat, site.lon)
        };
        let radius = 200.0 * (q as f64 + 1.0);
        let found: BTreeSet<&str> = index
            .candidates(pt(lat, lon), radius)
            .into_iter()
            .map(|e| e.iri.as_str())
            .collect();
        for e in &entities {
            if distance_m(lat, lon, e.location.lat(), e.location.lon()) <= radius {
                assert!(found.contains(e.iri.as_str()), "query {q} missed {}", e.iri);
            }
        }
    }
}

fn single_poi_case(stations: Vec<Site>, max_links: usize) -> LinkCase {
    LinkCase {
        pois: vec![Site {
            iri: "http://ex/poi/1".into(),
            lat: 48.0,
            lon: 11.0,
        }],
        unlocated: vec![],
        datasets: [("stations".to_string(), stations)].into_iter().collect(),
        radius_m: 1000.0,
        max_links,
        detour: 1.3,
        cell_deg: 0.01,
    }
}

fn east_of_poi(meters: f64) -> f64 {
    11.0 + (meters / 6_371_000.0 / 48f64.to_radians().cos()).to_degrees()
}

#[test]
fn station_one_hundred_meters_east() {
    let case = single_poi_case(
        vec![Site {
            iri: "http://ex/station/1".into(),
            lat: 48.0,
            lon: east_of_poi(100.0),
        }],
        5,
    );
    let store = case_store(&case, "by", POI);
    let links = link(
        &store,
        &case_config(&case, "by", POI),
        &case_indexes(&case, STATION),
    )
    .unwrap()
    .links;
    assert_eq!(links.len(), 1);
    let oracle = distance_m(48.0, 11.0, 48.0, east_of_poi(100.0));
    assert!((links[0].distance_meters - oracle).abs() < 1e-6);
    assert!((links[0].distance_meters - 100.0).abs() < 0.5);
    assert_eq!(links[0].walking_distance_meters, 130);
}

#[test]
fn boundary_is_inclusive_and_outside_is_excluded() {
    let lon = east_of_poi(1000.0);
    let exact = distance_m(48.0, 11.0, 48.0, lon);
    let mut case = single_poi_case(
        vec![Site {
            iri: "http://ex/station/edge".into(),
            lat: 48.0,
            lon,
        }],
        5,
    );
    case.radius_m = haversine_m(pt(48.0, 11.0), pt(48.0, lon));
    let store = case_store(&case, "by", POI);
    assert_eq!(
        link(
            &store,
            &case_config(&case, "by", POI),
            &case_indexes(&case, STATION)
        )
        .unwrap()
        .links
        .len(),
        1
    );
    case.radius_m = exact - 0.01;
    assert!(link(
        &store,
        &case_config(&case, "by", POI),
        &case_indexes(&case, STATION)
    )
    .unwrap()
    .links
    .is_empty());
}

#[test]
fn seven_stations_keep_the_five_nearest() {
    let offsets = [700.0, 100.0, 300.0, 300.0, 500.0, 900.0, 200.0];
    let stations: Vec<Site> = offsets
        .iter()
        .enumerate()
        .map(|(i, m)| Site {
            iri: format!("http://ex/station/{}", 7 - i),
            lat: 48.0,
            lon: east_of_poi(*m),
        })
        .collect();
    let case = single_poi_case(stations, 5);
    let store = case_store(&case, "by", POI);
    let links = link(
        &store,
        &case_config(&case, "by", POI),
        &case_indexes(&case, STATION),
    )
    .unwrap()
    .links;
    let got: Vec<&str> = links.iter().map(|l| l.entity.as_str()).collect();
    let want: Vec<String> = brute_force_links(&case)
        .into_iter()
        .map(|l| l.entity)
        .collect();
    assert_eq!(got, want);
    assert_eq!(
        got,
        [
            "http://ex/station/6",
            "http://ex/station/1",
            "http://ex/station/4",
            "http://ex/station/5",
            "http://ex/station/3"
        ]
    );
}

#[test]
fn materialized_literals_respect_radius_and_detour() {
    for case_no in 0..10 {
        let case = random_case(&mut rng("geo-materialize", case_no), 100, 200);
        let mut store = case_store(&case, "by", POI);
        let before = store.dump();
        let config = case_config(&case, "by", POI);
        let run = enrich_provider(&mut store, &config, &case_indexes(&case, STATION)).unwrap();
        assert_eq!(run.quads_written, 4 * run.links);
        let after = store.dump();
        let enrichment = Term::iri(vocab::ENRICHMENT_GRAPH);
        for q in after.iter().filter(|q| q.graph != enrichment) {
            assert!(before.contains(q));
        }
        assert_eq!(after.len(), before.len() + run.quads_written);
        let int = |t: &Term| t.as_literal().unwrap().lexical().parse::<f64>().unwrap();
        let distance = Term::iri(vocab::DISTANCE_METERS);
        let walking = Term::iri(vocab::WALKING_DISTANCE_METERS);
        for q in store.match_quads(None, Some(&distance), None, Some(&enrichment)) {
            assert!(int(&q.object) <= case.radius_m);
            let w = store
                .match_quads(Some(&q.subject), Some(&walking), None, None)
                .next()
                .unwrap();
            let entity = store
                .match_quads(
                    Some(&q.subject),
                    Some(&Term::iri(vocab::LINK_ENTITY)),
                    None,
                    None,
                )
                .next()
                .unwrap();
            let poi = store
                .match_quads(
                    None,
                    Some(&Term::iri(vocab::NEARBY)),
                    Some(&q.subject),
                    None,
                )
                .next()
                .unwrap();
            let expected = brute_force_links(&case)
                .into_iter()
                .find(|l| {
                    Term::iri(l.poi.as_str()) == poi.subject
                        && Term::iri(l.entity.as_str()) == entity.object
                })
                .unwrap();
            assert_eq!(int(&w.object), expected.walking_m as f64);
        }
        let again = enrich_provider(&mut store, &config, &case_indexes(&case, STATION)).unwrap();
        assert_eq!(again.quads_removed, again.quads_written);
        assert_eq!(store.dump(), after);
    }
}

proptest! {
    #[test]
    fn haversine_is_a_metric(
        a in (-90.0f64..90.0, -180.0f64..180.0),
        b in (-90.0f64..90.0, -180.0f64..180.0),
        c in (-90.0f64..90.0, -180.0f64..180.0),
    ) {
        let (a, b, c) = (pt(a.0, a.1), pt(b.0, b.1), pt(c.0, c.1));
        prop_assert_eq!(haversine_m(a, a), 0.0);
        prop_assert!((haversine_m(a, b) - haversine_m(b, a)).abs() <= 1e-9 * haversine_m(a, b).max(1.0));
        let bound = haversine_m(a, b) + haversine_m(b, c);
        prop_assert!(haversine_m(a, c) <= bound * (1.0 + 1e-6) + 1e-6);
        prop_assert!((haversine_m(a, b) - distance_m(a.lat(), a.lon(), b.lat(), b.lon())).abs() < 1e-3);
    }
}
