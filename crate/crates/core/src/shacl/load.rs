use std::collections::{BTreeMap, BTreeSet};

use super::{NodeKind, Pattern, PropertyShape, ShaclError, Shape, ShapeCatalog};
use crate::rdf::{Graph, Term};
use crate::vocab;

const SUPPORTED_ON_NODE_SHAPE: &[&str] = &["targetClass", "property", "closed"];
const SUPPORTED_ON_PROPERTY_SHAPE: &[&str] = &[
    "path", "minCount", "maxCount", "datatype", "class", "nodeKind", "in", "pattern", "node",
];

/// Builds a catalog from the `sh:NodeShape` resources of `shape_graph`.
///
/// Node shapes are the IRIs typed `sh:NodeShape` plus any IRI carrying
/// `sh:targetClass` or `sh:property`. A `sh:node` reference to anything
/// else is a [`ShaclError::Shape`].
pub fn load_shapes(shape_graph: &Graph) -> Result<ShapeCatalog, ShaclError> {
    let sh = |local: &str| format!("{}{local}", vocab::SH);
    let node_shape_type = Term::Iri(sh("NodeShape"));
    let mut shape_nodes: BTreeSet<Term> = BTreeSet::new();
    for q in shape_graph.iter() {
        let p = q.predicate.as_iri().unwrap_or_default();
        let declared = p == vocab::RDF_TYPE && q.object == node_shape_type;
        if declared || p == sh("targetClass") || p == sh("property") {
            shape_nodes.insert(q.subject.clone());
        }
    }

    let mut warnings = Vec::new();
    let mut shapes = BTreeMap::new();
    for node in &shape_nodes {
        let Term::Iri(iri) = node else {
            return Err(shape_error(&node.to_string(), "node shapes must be IRIs"));
        };
        let shape = load_node_shape(shape_graph, node, iri, &mut warnings)?;
        shapes.insert(iri.clone(), shape);
    }

    for shape in shapes.values() {
        for ps in &shape.property_shapes {
            if let Some(target) = &ps.node {
                if !shapes.contains_key(target) {
                    return Err(shape_error(
                        &shape.id,
                        &format!("sh:node references unknown shape <{target}>"),
                    ));
                }
            }
        }
    }
    Ok(ShapeCatalog { shapes, warnings })
}

fn shape_error(iri: &str, message: &str) -> ShaclError {
    ShaclError::Shape {
        shape_iri: iri.to_string(),
        message: message.to_string(),
    }
}

fn sh_local(predicate: &Term) -> Option<&str> {
    predicate.as_iri().and_then(|p| p.strip_prefix(vocab::SH))
}

fn load_node_shape(
    graph: &Graph,
    node: &Term,
    iri: &str,
    warnings: &mut Vec<String>,
) -> Result<Shape, ShaclError> {
    let mut shape = Shape {
        id: iri.to_string(),
        target_classes: BTreeSet::new(),
        property_shapes: Vec::new(),
        closed: false,
    };
    let mut closed_seen = false;
    for q in graph.with_subject(node) {
        let Some(local) = sh_local(&q.predicate) else {
            continue;
        };
        match local {
            "targetClass" => match &q.object {
                Term::Iri(class) => {
                    shape.target_classes.insert(class.clone());
                }
                _ => return Err(shape_error(iri, "sh:targetClass must be an IRI")),
            },
            "property" => {
                let ps = load_property_shape(graph, &q.object, iri, warnings)?;
                shape.property_shapes.push(ps);
            }
            "closed" => {
                if closed_seen {
                    return Err(shape_error(iri, "sh:closed given more than once"));
                }
                closed_seen = true;
                shape.closed = boolean_value(&q.object)
                    .ok_or_else(|| shape_error(iri, "sh:closed must be a boolean literal"))?;
            }
            other if !SUPPORTED_ON_NODE_SHAPE.contains(&other) => {
                warnings.push(format!(
                    "<{iri}>: unsupported SHACL term sh:{other} ignored"
                ));
            }
            _ => {}
        }
    }
    Ok(shape)
}

fn load_property_shape(
    graph: &Graph,
    node: &Term,
    owner: &str,
    warnings: &mut Vec<String>,
) -> Result<PropertyShape, ShaclError> {
    if node.is_literal() {
        return Err(shape_error(owner, "sh:property value must be a node"));
    }
    let mut ps = PropertyShape::default();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut path_seen = false;
    for q in graph.with_subject(node) {
        let Some(local) = sh_local(&q.predicate) else {
            continue;
        };
        if !SUPPORTED_ON_PROPERTY_SHAPE.contains(&local) {
            warnings.push(format!(
                "<{owner}>: unsupported SHACL term sh:{local} on property shape ignored"
            ));
            continue;
        }
        if !seen.insert(local) {
            return Err(shape_error(
                owner,
                &format!("sh:{local} given more than once on one property shape"),
            ));
        }
        match local {
            "path" => {
                path_seen = true;
                match &q.object {
                    Term::Iri(p) => ps.path = p.clone(),
                    _ => {
                        return Err(shape_error(
                            owner,
                            "only single-predicate sh:path values are supported",
                        ))
                    }
                }
            }
            "minCount" => {
                ps.min_count = Some(count_value(&q.object).ok_or_else(|| {
                    shape_error(owner, "sh:minCount must be a non-negative integer literal")
                })?)
            }
            "maxCount" => {
                ps.max_count = Some(count_value(&q.object).ok_or_else(|| {
                    shape_error(owner, "sh:maxCount must be a non-negative integer literal")
                })?)
            }
            "datatype" => {
                ps.datatype = Some(
                    iri_value(&q.object)
                        .ok_or_else(|| shape_error(owner, "sh:datatype must be an IRI"))?,
                )
            }
            "class" => {
                ps.class = Some(
                    iri_value(&q.object)
                        .ok_or_else(|| shape_error(owner, "sh:class must be an IRI"))?,
                )
            }
            "node" => {
                ps.node = Some(
                    iri_value(&q.object)
                        .ok_or_else(|| shape_error(owner, "sh:node must be an IRI"))?,
                )
            }
            "nodeKind" => {
                ps.node_kind = Some(
                    match q.object.as_iri().and_then(|i| i.strip_prefix(vocab::SH)) {
                        Some("IRI") => NodeKind::Iri,
                        Some("Literal") => NodeKind::Literal,
                        Some("BlankNodeOrIRI") => NodeKind::BlankNodeOrIRI,
                        _ => {
                            return Err(shape_error(
                                owner,
                                "sh:nodeKind must be sh:IRI, sh:Literal or sh:BlankNodeOrIRI",
                            ))
                        }
                    },
                )
            }
            "in" => {
                ps.in_values =
                    Some(read_list(graph, &q.object).ok_or_else(|| {
                        shape_error(owner, "sh:in must be a well-formed RDF list")
                    })?)
            }
            "pattern" => {
                let Term::Literal(lit) = &q.object else {
                    return Err(shape_error(owner, "sh:pattern must be a string literal"));
                };
                let pattern = Pattern::new(lit.lexical())
                    .map_err(|e| shape_error(owner, &format!("invalid sh:pattern: {e}")))?;
                ps.pattern = Some(pattern);
            }
            _ => unreachable!("filtered by SUPPORTED_ON_PROPERTY_SHAPE"),
        }
    }
    if !path_seen {
        return Err(shape_error(owner, "property shape without sh:path"));
    }
    if let (Some(min), Some(max)) = (ps.min_count, ps.max_count) {
        if min > max {
            return Err(shape_error(
                owner,
                &format!(
                    "sh:minCount {min} exceeds sh:maxCount {max} on <{}>",
                    ps.path
                ),
            ));
        }
    }
    if ps.datatype.is_some() && ps.class.is_some() {
        return Err(shape_error(
            owner,
            &format!("both sh:datatype and sh:class on <{}>", ps.path),
        ));
    }
    Ok(ps)
}

fn count_value(term: &Term) -> Option<u64> {
    let lit = term.as_literal()?;
    let integer_types = [
        vocab::XSD_INTEGER,
        vocab::XSD_NON_NEGATIVE_INTEGER,
        "http://www.w3.org/2001/XMLSchema#positiveInteger",
        "http://www.w3.org/2001/XMLSchema#int",
        "http://www.w3.org/2001/XMLSchema#long",
    ];
    if !integer_types.contains(&lit.datatype()) {
        return None;
    }
    lit.lexical()
        .trim()
        .strip_prefix('+')
        .unwrap_or(lit.lexical().trim())
        .parse()
        .ok()
}

fn boolean_value(term: &Term) -> Option<bool> {
    let lit = term.as_literal()?;
    if lit.datatype() != vocab::XSD_BOOLEAN {
        return None;
    }
    match lit.lexical() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn iri_value(term: &Term) -> Option<String> {
    term.as_iri().map(str::to_string)
}

fn read_list(graph: &Graph, head: &Term) -> Option<Vec<Term>> {
    let mut items = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cell = head.clone();
    loop {
        if cell.as_iri() == Some(vocab::RDF_NIL) {
            return Some(items);
        }
        if !seen.insert(cell.clone()) {
            return None;
        }
        let firsts: Vec<&Term> = graph.objects(&cell, vocab::RDF_FIRST).collect();
        let rests: Vec<&Term> = graph.objects(&cell, vocab::RDF_REST).collect();
        let ([first], [rest]) = (firsts.as_slice(), rests.as_slice()) else {
            return None;
        };
        let (first, rest) = ((*first).clone(), (*rest).clone());
        items.push(first);
        cell = rest;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle_subset;

    const PREFIXES: &str = "@prefix sh: <http://www.w3.org/ns/shacl#> .\n\
        @prefix schema: <http://schema.org/> .\n\
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
        @prefix ex: <http://ex/shapes/> .\n";

    fn load(body: &str) -> Result<ShapeCatalog, ShaclError> {
        let graph = parse_turtle_subset(
            &format!("{PREFIXES}{body}"),
            &Term::iri(vocab::DEFAULT_GRAPH),
        )
        .unwrap();
        load_shapes(&graph)
    }

    #[test]
    fn event_spec() {
        let catalog = load(
            "ex:EventSpec a sh:NodeShape ; sh:targetClass schema:Event ;\n\
             sh:property [ sh:path schema:name ; sh:minCount \"1\"^^xsd:integer ] .",
        )
        .unwrap();
        assert_eq!(catalog.len(), 1);
        let shape = catalog.get("http://ex/shapes/EventSpec").unwrap();
        assert_eq!(shape.property_shapes.len(), 1);
        assert_eq!(shape.property_shapes[0].min_count, Some(1));
        assert!(shape.target_classes.contains("http://schema.org/Event"));
        assert!(catalog.warnings().is_empty());
    }

    #[test]
    fn empty_graph() {
        let catalog = load_shapes(&Graph::new()).unwrap();
        assert!(catalog.is_empty());
        assert!(catalog.warnings().is_empty());
    }

    #[test]
    fn non_integer_min_count() {
        let err = load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:name ; sh:minCount \"two\" ] .",
        )
        .unwrap_err();
        assert!(
            matches!(err, ShaclError::Shape { ref shape_iri, .. } if shape_iri == "http://ex/shapes/S")
        );
    }

    #[test]
    fn missing_path() {
        let err = load("ex:S a sh:NodeShape ; sh:property [ sh:minCount \"1\"^^xsd:integer ] .")
            .unwrap_err();
        assert!(err.to_string().contains("sh:path"));
    }

    #[test]
    fn structural_rules() {
        assert!(load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:name ; sh:minCount \"2\"^^xsd:integer ; sh:maxCount \"1\"^^xsd:integer ] ."
        )
        .is_err());
        assert!(load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:geo ; sh:datatype xsd:string ; sh:class schema:GeoCoordinates ] ."
        )
        .is_err());
        assert!(load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:geo ; sh:node ex:Missing ] ."
        )
        .is_err());
        assert!(load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:name ; sh:pattern \"(a\" ] ."
        )
        .is_err());
        assert!(load(
            "ex:S a sh:NodeShape ; sh:property [ sh:path schema:name ; sh:pattern \"(a)\\\\1\" ] ."
        )
        .is_err());
    }

    #[test]
    fn unsupported_terms_warn() {
        let catalog = load(
            "ex:S a sh:NodeShape ; sh:targetClass schema:Event ; sh:severity sh:Warning ;\n\
             sh:property [ sh:path schema:name ; sh:name \"Name\" ; sh:minCount \"1\"^^xsd:integer ] .",
        )
        .unwrap();
        assert_eq!(catalog.warnings().len(), 2);
        assert!(
            catalog.warnings()[0].contains("sh:severity")
                || catalog.warnings()[1].contains("sh:severity")
        );
    }

    #[test]
    fn nested_shapes_and_lists() {
        let catalog = load(
            "ex:Poi a sh:NodeShape ; sh:targetClass schema:Place ; sh:closed \"true\"^^xsd:boolean ;\n\
               sh:property [ sh:path schema:geo ; sh:node ex:Geo ; sh:nodeKind sh:BlankNodeOrIRI ] ;\n\
               sh:property [ sh:path schema:smokingAllowed ; sh:in ( \"yes\" \"no\" ) ] .\n\
             ex:Geo a sh:NodeShape ; sh:property [ sh:path schema:latitude ; sh:datatype xsd:double ] .",
        )
        .unwrap();
        assert_eq!(catalog.len(), 2);
        let poi = catalog.get("http://ex/shapes/Poi").unwrap();
        assert!(poi.closed);
        let in_values = poi
            .property_shapes
            .iter()
            .find_map(|p| p.in_values.clone())
            .unwrap();
        assert_eq!(in_values, vec![Term::string("yes"), Term::string("no")]);
    }
}
