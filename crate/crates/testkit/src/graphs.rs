//! Random graphs and stores, and brute-force scans over them.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use tkg_core::store::{Store, UnshapedPolicy};
use tkg_core::{vocab, Graph, Quad, Term};

const IRIS: &[&str] = &[
    "http://ex/a",
    "http://ex/b",
    "http://ex/c",
    "https://example.org/straße/ü",
    "http://ex/x%20y",
    "urn:isbn:0451450523",
    "http://ex/q?x=1&y=2#frag",
    "http://schema.org/Event",
];

const PREDICATES: &[&str] = &[
    "http://ex/p",
    "http://ex/p#h",
    "http://schema.org/name",
    "urn:x:pred",
    vocab::RDF_TYPE,
];

const TEXT_PIECES: &[&str] = &[
    "a", "Fest", " ", "\"", "\\", "\n", "\t", "\r", "ä", "€", "😀", "'", "{", "}", "<", "#", "@",
];

fn random_text(rng: &mut StdRng) -> String {
    (0..rng.gen_range(0..6))
        .map(|_| *TEXT_PIECES.choose(rng).expect("non-empty"))
        .collect()
}

fn random_literal(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..9) {
        0 | 1 => Term::string(random_text(rng)),
        2 => Term::lang(
            random_text(rng),
            *["de", "en", "en-us", "fr-ch"]
                .choose(rng)
                .expect("non-empty"),
        ),
        3 => Term::typed(
            rng.gen_range(-1000i64..1000).to_string(),
            vocab::XSD_INTEGER,
        ),
        4 => Term::typed(
            *["007", "+3", "-0"].choose(rng).expect("non-empty"),
            vocab::XSD_INTEGER,
        ),
        5 => Term::typed(
            *["1.5E3", "2.25", "-0.0", "INF"]
                .choose(rng)
                .expect("non-empty"),
            vocab::XSD_DOUBLE,
        ),
        6 => Term::typed(
            *["true", "false", "1"].choose(rng).expect("non-empty"),
            vocab::XSD_BOOLEAN,
        ),
        7 => Term::typed("2024-09-21", vocab::XSD_DATE),
        _ => Term::typed(random_text(rng), "http://ex/datatype"),
    }
}

/// Graph of up to `max_quads` statements in `graph`, with at most five
/// blank nodes and literals exercising escapes, tags and datatypes.
pub fn random_graph(rng: &mut StdRng, max_quads: usize, graph: &Term) -> Graph {
    let mut g = Graph::new();
    let n = rng.gen_range(0..=max_quads);
    while g.len() < n {
        let subject = if rng.gen_bool(0.3) {
            Term::blank(format!("n{}", rng.gen_range(0..5)))
        } else {
            Term::iri(*IRIS.choose(rng).expect("non-empty"))
        };
        let predicate = Term::iri(*PREDICATES.choose(rng).expect("non-empty"));
        let object = match rng.gen_range(0..4) {
            0 => Term::iri(*IRIS.choose(rng).expect("non-empty")),
            1 => Term::blank(format!("n{}", rng.gen_range(0..5))),
            _ => random_literal(rng),
        };
        g.insert(Quad::new(subject, predicate, object, graph.clone()));
    }
    g
}

/// Store with up to `max_quads` quads spread over three provider graphs,
/// drawn from small pools so that patterns and joins hit often.
pub fn random_store(rng: &mut StdRng, max_quads: usize) -> Store {
    let mut store = Store::new();
    let graphs: Vec<Term> = ["p1", "p2", "p3"]
        .iter()
        .map(|id| {
            store
                .register_provider(id, UnshapedPolicy::AdmitUnshaped)
                .expect("valid id")
        })
        .collect();
    let n = rng.gen_range(max_quads / 4..=max_quads);
    for _ in 0..n {
        let subject = random_node(rng);
        let predicate = Term::iri(*POOL_PREDICATES.choose(rng).expect("non-empty"));
        let object = if predicate.as_iri() == Some(vocab::RDF_TYPE) {
            Term::iri(*POOL_CLASSES.choose(rng).expect("non-empty"))
        } else {
            match rng.gen_range(0..3) {
                0 => random_node(rng),
                _ => pool_literal(rng),
            }
        };
        let graph = graphs.choose(rng).expect("non-empty").clone();
        store
            .insert(Quad::new(subject, predicate, object, graph))
            .expect("registered graph");
    }
    store
}

pub const POOL_PREDICATES: &[&str] = &[
    "http://ex/p0",
    "http://ex/p1",
    "http://ex/p2",
    "http://ex/p3",
    vocab::RDF_TYPE,
];

pub const POOL_CLASSES: &[&str] = &[
    "http://schema.org/Event",
    "https://odta.io/voc/PointOfInterest",
    "https://odta.io/voc/Trail",
    "http://schema.org/LodgingBusiness",
];

fn random_node(rng: &mut StdRng) -> Term {
    if rng.gen_bool(0.15) {
        Term::blank(format!("b{}", rng.gen_range(0..4)))
    } else {
        Term::iri(format!("http://ex/s{}", rng.gen_range(0..12)))
    }
}

/// Literal pool shared with the query generator.
pub fn pool_literal(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..8) {
        0 => Term::integer(rng.gen_range(0..6)),
        1 => Term::typed(format!("{}.5", rng.gen_range(0..5)), vocab::XSD_DECIMAL),
        2 => Term::typed(format!("{}.0E0", rng.gen_range(0..6)), vocab::XSD_DOUBLE),
        3 => Term::typed(
            *["true", "false"].choose(rng).expect("non-empty"),
            vocab::XSD_BOOLEAN,
        ),
        4 => Term::lang(
            *POOL_WORDS.choose(rng).expect("non-empty"),
            *["de", "en"].choose(rng).expect("non-empty"),
        ),
        5 => Term::typed("2024-05-01", vocab::XSD_DATE),
        _ => Term::string(*POOL_WORDS.choose(rng).expect("non-empty")),
    }
}

pub const POOL_WORDS: &[&str] = &[
    "alpha", "Alpine", "beta", "Fest", "festival", "", "Zug", "äpfel",
];

/// Per type IRI, the number of distinct IRI subjects typed with it in any
/// provider graph, found by scanning every quad.
pub fn typed_subject_counts(store: &Store) -> BTreeMap<String, usize> {
    let mut seen: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for q in store.iter() {
        let in_provider = q
            .graph
            .as_iri()
            .and_then(vocab::provider_of_graph)
            .is_some();
        if !in_provider || q.predicate.as_iri() != Some(vocab::RDF_TYPE) {
            continue;
        }
        if let (Term::Iri(s), Term::Iri(t)) = (&q.subject, &q.object) {
            seen.entry(t.clone()).or_default().insert(s.clone());
        }
    }
    seen.into_iter().map(|(t, s)| (t, s.len())).collect()
}
