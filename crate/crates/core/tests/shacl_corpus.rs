//! Shape validation agrees with an independent SHACL engine on the fixture
//! corpus. `expected.json` is produced by `generate_expected.py`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use tkg_core::rdf::{parse, Format};
use tkg_core::shacl::{load_shapes, resolve_shape, validate_all, Constraint, ShapeCatalog};
use tkg_core::{vocab, Term};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn catalog() -> ShapeCatalog {
    let text = std::fs::read_to_string(fixtures().join("shapes/domain.ttl")).unwrap();
    let graph = parse(
        &text,
        Format::TurtleSubset,
        &Term::iri(vocab::DEFAULT_GRAPH),
    )
    .unwrap();
    let catalog = load_shapes(&graph).unwrap();
    assert!(catalog.warnings().is_empty(), "{:?}", catalog.warnings());
    catalog
}

#[test]
fn domain_shapes_load() {
    let catalog = catalog();
    assert_eq!(catalog.len(), 8);
    let targeted = catalog
        .shapes()
        .filter(|s| !s.target_classes.is_empty())
        .count();
    assert_eq!(targeted, 6);
}

#[test]
fn corpus_matches_reference_engine() {
    let catalog = catalog();
    let dir = fixtures().join("shacl-corpus");
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    let expected = expected.as_object().unwrap();
    assert!(expected.len() >= 30);

    let mut disagreements = Vec::new();
    for (case, want) in expected {
        let text = std::fs::read_to_string(dir.join(format!("{case}.ttl"))).unwrap();
        let graph = parse(
            &text,
            Format::TurtleSubset,
            &Term::iri(vocab::DEFAULT_GRAPH),
        )
        .unwrap();
        let mut conforms = true;
        let mut components = BTreeSet::new();
        let mut roots = 0;
        for subject in graph.subjects() {
            if !subject.is_iri() {
                continue;
            }
            let shapes = resolve_shape(subject, &graph, &catalog).unwrap();
            if shapes.is_empty() {
                continue;
            }
            roots += 1;
            let report = validate_all(subject, &graph, &shapes, &catalog);
            conforms &= report.conforms();
            for v in report.violations() {
                let c = if &v.focus_node == subject {
                    v.constraint
                } else {
                    Constraint::Node
                };
                components.insert(c.to_string());
            }
        }
        assert_eq!(roots, 1, "{case}");
        let want_components: BTreeSet<String> = want["components"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().to_string())
            .collect();
        if conforms != want["conforms"].as_bool().unwrap() || components != want_components {
            disagreements.push(format!(
                "{case}: got {conforms} {components:?}, expected {want}"
            ));
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:#?}");
}
