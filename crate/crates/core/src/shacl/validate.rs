use std::collections::{BTreeSet, HashSet};
use std::sync::LazyLock;

use regex::Regex;

use super::{
    Constraint, NodeKind, PropertyShape, ShaclError, Shape, ShapeCatalog, ValidationReport,
    Violation,
};
use crate::rdf::{Graph, Literal, Term};
use crate::vocab;

/// Shapes an instance must satisfy: explicit `urn:tkg:shape` references
/// first, then target-class matches, each group sorted by IRI.
pub fn resolve_shape<'c>(
    instance: &Term,
    graph: &Graph,
    catalog: &'c ShapeCatalog,
) -> Result<Vec<&'c Shape>, ShaclError> {
    let explicit: BTreeSet<&str> = graph
        .objects(instance, vocab::SHAPE_REFERENCE)
        .filter_map(Term::as_iri)
        .collect();
    let mut out = Vec::new();
    for iri in &explicit {
        let shape = catalog
            .get(iri)
            .ok_or_else(|| ShaclError::UnknownShapeReference {
                iri: iri.to_string(),
            })?;
        out.push(shape);
    }
    let types: BTreeSet<&str> = graph
        .objects(instance, vocab::RDF_TYPE)
        .filter_map(Term::as_iri)
        .collect();
    for shape in catalog.shapes() {
        if explicit.contains(shape.id.as_str()) {
            continue;
        }
        if shape
            .target_classes
            .iter()
            .any(|c| types.contains(c.as_str()))
        {
            out.push(shape);
        }
    }
    Ok(out)
}

/// Checks `instance` against `shape`. Nested `sh:node` constraints recurse
/// into value nodes; violations found there are reported with the value node
/// as focus.
pub fn validate(
    instance: &Term,
    graph: &Graph,
    shape: &Shape,
    catalog: &ShapeCatalog,
) -> ValidationReport {
    let mut run = Run {
        graph,
        catalog,
        visited: HashSet::new(),
        violations: Vec::new(),
    };
    run.node(instance, shape);
    ValidationReport::new(run.violations)
}

/// Checks `instance` against every shape in `shapes` within one traversal,
/// so a (node, shape) pair reached from several roots is checked once.
pub fn validate_all(
    instance: &Term,
    graph: &Graph,
    shapes: &[&Shape],
    catalog: &ShapeCatalog,
) -> ValidationReport {
    let mut run = Run {
        graph,
        catalog,
        visited: HashSet::new(),
        violations: Vec::new(),
    };
    for shape in shapes {
        run.node(instance, shape);
    }
    ValidationReport::new(run.violations)
}

struct Run<'a> {
    graph: &'a Graph,
    catalog: &'a ShapeCatalog,
    visited: HashSet<(Term, String)>,
    violations: Vec<Violation>,
}

impl Run<'_> {
    fn node(&mut self, focus: &Term, shape: &Shape) {
        if !self.visited.insert((focus.clone(), shape.id.clone())) {
            return;
        }
        for ps in &shape.property_shapes {
            self.property(focus, ps);
        }
        if shape.closed {
            let permitted = shape.permitted_predicates();
            let extra: Vec<(String, Term)> = self
                .graph
                .with_subject(focus)
                .filter_map(|q| {
                    let p = q.predicate.as_iri()?;
                    (!permitted.contains(p)).then(|| (p.to_string(), q.object.clone()))
                })
                .collect();
            for (p, value) in extra {
                self.report(
                    focus,
                    Some(&p),
                    Constraint::Closed,
                    format!(
                        "predicate <{p}> is not allowed by closed shape <{}>",
                        shape.id
                    ),
                    Some(value),
                );
            }
        }
    }

    fn property(&mut self, focus: &Term, ps: &PropertyShape) {
        let values: Vec<Term> = if focus.is_literal() {
            Vec::new()
        } else {
            self.graph.objects(focus, &ps.path).cloned().collect()
        };
        let count = values.len() as u64;
        if let Some(min) = ps.min_count {
            if count < min {
                self.report(
                    focus,
                    Some(&ps.path),
                    Constraint::MinCount,
                    format!(
                        "minCount {min} violated: {count} value(s) for <{}>",
                        ps.path
                    ),
                    None,
                );
            }
        }
        if let Some(max) = ps.max_count {
            if count > max {
                self.report(
                    focus,
                    Some(&ps.path),
                    Constraint::MaxCount,
                    format!(
                        "maxCount {max} violated: {count} value(s) for <{}>",
                        ps.path
                    ),
                    None,
                );
            }
        }
        for value in &values {
            self.value(focus, ps, value);
        }
    }

    fn value(&mut self, focus: &Term, ps: &PropertyShape, value: &Term) {
        let path = Some(ps.path.as_str());
        if let Some(dt) = &ps.datatype {
            let ok =
                matches!(value, Term::Literal(lit) if lit.datatype() == dt && is_well_formed(lit));
            if !ok {
                self.report(
                    focus,
                    path,
                    Constraint::Datatype,
                    format!("value {value} is not a well-formed <{dt}> literal"),
                    Some(value.clone()),
                );
            }
        }
        if let Some(class) = &ps.class {
            if !self.is_instance_of(value, class) {
                self.report(
                    focus,
                    path,
                    Constraint::Class,
                    format!("value {value} is not an instance of <{class}>"),
                    Some(value.clone()),
                );
            }
        }
        if let Some(kind) = ps.node_kind {
            let ok = match kind {
                NodeKind::Iri => value.is_iri(),
                NodeKind::Literal => value.is_literal(),
                NodeKind::BlankNodeOrIRI => !value.is_literal(),
            };
            if !ok {
                self.report(
                    focus,
                    path,
                    Constraint::NodeKind,
                    format!("value {value} does not have node kind {kind:?}"),
                    Some(value.clone()),
                );
            }
        }
        if let Some(allowed) = &ps.in_values {
            if !allowed.contains(value) {
                self.report(
                    focus,
                    path,
                    Constraint::In,
                    format!("value {value} is not among the allowed values"),
                    Some(value.clone()),
                );
            }
        }
        if let Some(pattern) = &ps.pattern {
            let text = match value {
                Term::Iri(iri) => Some(iri.as_str()),
                Term::Literal(lit) => Some(lit.lexical()),
                Term::BlankNode(_) => None,
            };
            if !text.is_some_and(|t| pattern.is_match(t)) {
                self.report(
                    focus,
                    path,
                    Constraint::Pattern,
                    format!(
                        "value {value} does not match pattern \"{}\"",
                        pattern.as_str()
                    ),
                    Some(value.clone()),
                );
            }
        }
        if let Some(node_shape) = &ps.node {
            if let Some(nested) = self.catalog.get(node_shape) {
                self.node(value, nested);
            } else {
                self.report(
                    focus,
                    path,
                    Constraint::Node,
                    format!("shape <{node_shape}> is not in the catalog"),
                    Some(value.clone()),
                );
            }
        }
    }

    /// rdf:type, following rdfs:subClassOf within the instance graph.
    fn is_instance_of(&self, value: &Term, class: &str) -> bool {
        if value.is_literal() {
            return false;
        }
        let mut frontier: Vec<Term> = self
            .graph
            .objects(value, vocab::RDF_TYPE)
            .cloned()
            .collect();
        let mut seen = HashSet::new();
        while let Some(t) = frontier.pop() {
            if t.as_iri() == Some(class) {
                return true;
            }
            if seen.insert(t.clone()) {
                frontier.extend(self.graph.objects(&t, vocab::RDFS_SUBCLASS_OF).cloned());
            }
        }
        false
    }

    fn report(
        &mut self,
        focus: &Term,
        path: Option<&str>,
        constraint: Constraint,
        message: String,
        value: Option<Term>,
    ) {
        self.violations.push(Violation {
            focus_node: focus.clone(),
            path: path.map(str::to_string),
            constraint,
            message,
            value,
        });
    }
}

static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?[0-9]+$").unwrap());
static DECIMAL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$").unwrap());
static DOUBLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?INF|NaN)$").unwrap()
});
static DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^-?([0-9]{4,})-([0-9]{2})-([0-9]{2})(Z|[+-][0-9]{2}:[0-9]{2})?$").unwrap()
});
static DATE_TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^-?([0-9]{4,})-([0-9]{2})-([0-9]{2})T([0-9]{2}):([0-9]{2}):([0-9]{2})(\.[0-9]+)?(Z|[+-][0-9]{2}:[0-9]{2})?$")
        .unwrap()
});

/// Lexical-space check for the XSD datatypes the domain specifications use;
/// other datatypes are accepted as-is.
fn is_well_formed(lit: &Literal) -> bool {
    let lex = lit.lexical();
    match lit.datatype() {
        vocab::XSD_INTEGER => INTEGER.is_match(lex),
        vocab::XSD_NON_NEGATIVE_INTEGER => {
            INTEGER.is_match(lex) && !lex.starts_with('-') || lex == "-0"
        }
        vocab::XSD_DECIMAL => DECIMAL.is_match(lex),
        vocab::XSD_DOUBLE | vocab::XSD_FLOAT => DOUBLE.is_match(lex),
        vocab::XSD_BOOLEAN => matches!(lex, "true" | "false" | "1" | "0"),
        vocab::XSD_DATE => DATE
            .captures(lex)
            .is_some_and(|c| valid_month_day(&c[1], &c[2], &c[3])),
        vocab::XSD_DATE_TIME => DATE_TIME.captures(lex).is_some_and(|c| {
            valid_month_day(&c[1], &c[2], &c[3])
                && c[4].parse::<u32>().is_ok_and(|h| h <= 24)
                && c[5].parse::<u32>().is_ok_and(|m| m < 60)
                && c[6].parse::<u32>().is_ok_and(|s| s < 60)
        }),
        _ => true,
    }
}

fn valid_month_day(year: &str, month: &str, day: &str) -> bool {
    let (Ok(y), Ok(m), Ok(d)) = (
        year.parse::<i64>(),
        month.parse::<u32>(),
        day.parse::<u32>(),
    ) else {
        return false;
    };
    let leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    let days = match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        2 => 28,
        _ => return false,
    };
    (1..=days).contains(&d)
}
