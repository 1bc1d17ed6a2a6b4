//! Domain-specification shapes: a SHACL subset with twelve vocabulary terms
//! (`sh:targetClass`, `sh:property`, `sh:path`, `sh:minCount`, `sh:maxCount`,
//! `sh:datatype`, `sh:class`, `sh:nodeKind`, `sh:in`, `sh:pattern`,
//! `sh:node`, `sh:closed`).
//!
//! Every finding has the same severity; an instance is admitted only when it
//! conforms to every shape selected for it.

mod load;
mod validate;

pub use load::load_shapes;
pub use validate::{resolve_shape, validate, validate_all};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShaclError {
    #[error("shape <{shape_iri}>: {message}")]
    Shape { shape_iri: String, message: String },
    #[error("explicit shape reference to unknown shape <{iri}>")]
    UnknownShapeReference { iri: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeKind {
    #[serde(rename = "IRI")]
    Iri,
    Literal,
    BlankNodeOrIRI,
}

/// Compiled `sh:pattern`.
#[derive(Clone)]
pub struct Pattern {
    source: String,
    regex: regex::Regex,
}

impl Pattern {
    /// Compiles a pattern in the supported dialect: literals, classes,
    /// anchors, repetition, alternation and groups. Inline flags,
    /// lookaround and backreferences are rejected.
    pub fn new(source: &str) -> Result<Pattern, String> {
        if source.contains("(?") {
            return Err("inline flags and lookaround are not supported".into());
        }
        let mut chars = source.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '\\' {
                if let Some(n) = chars.next() {
                    if n.is_ascii_digit() && n != '0' {
                        return Err("backreferences are not supported".into());
                    }
                }
            }
        }
        let regex = regex::Regex::new(source).map_err(|e| e.to_string())?;
        Ok(Pattern {
            source: source.to_string(),
            regex,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({:?})", self.source)
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for Pattern {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertyShape {
    pub path: String,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub datatype: Option<String>,
    pub class: Option<String>,
    pub node_kind: Option<NodeKind>,
    pub in_values: Option<Vec<Term>>,
    pub pattern: Option<Pattern>,
    pub node: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub id: String,
    pub target_classes: BTreeSet<String>,
    pub property_shapes: Vec<PropertyShape>,
    pub closed: bool,
}

impl Shape {
    /// Predicates allowed on a focus node of a closed shape.
    pub fn permitted_predicates(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .property_shapes
            .iter()
            .map(|p| p.path.as_str())
            .collect();
        out.insert(crate::vocab::RDF_TYPE);
        out
    }
}

/// Loaded shapes keyed by IRI, plus warnings about SHACL terms outside the
/// supported subset.
#[derive(Debug, Clone, Default)]
pub struct ShapeCatalog {
    shapes: BTreeMap<String, Shape>,
    warnings: Vec<String>,
}

impl ShapeCatalog {
    pub fn get(&self, iri: &str) -> Option<&Shape> {
        self.shapes.get(iri)
    }

    pub fn shapes(&self) -> impl Iterator<Item = &Shape> {
        self.shapes.values()
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Combines catalogs loaded from separate files. Later shapes with an
    /// already-present IRI are reported as an error.
    pub fn merge(&mut self, other: ShapeCatalog) -> Result<(), ShaclError> {
        for (iri, shape) in other.shapes {
            if self.shapes.contains_key(&iri) {
                return Err(ShaclError::Shape {
                    shape_iri: iri,
                    message: "shape defined more than once".into(),
                });
            }
            self.shapes.insert(iri, shape);
        }
        self.warnings.extend(other.warnings);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Constraint {
    MinCount,
    MaxCount,
    Datatype,
    Class,
    NodeKind,
    In,
    Pattern,
    Node,
    Closed,
    ShapeReference,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = serde_json::to_value(self).expect("unit enum serializes");
        f.write_str(name.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    #[serde(serialize_with = "term_as_string")]
    pub focus_node: Term,
    pub path: Option<String>,
    pub constraint: Constraint,
    pub message: String,
    #[serde(serialize_with = "opt_term_as_string")]
    pub value: Option<Term>,
}

/// IRIs as bare strings, other terms in N-Triples form.
pub fn term_label(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.clone(),
        other => other.to_string(),
    }
}

fn term_as_string<S: Serializer>(term: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&term_label(term))
}

fn opt_term_as_string<S: Serializer>(term: &Option<Term>, s: S) -> Result<S::Ok, S::Error> {
    match term {
        Some(t) => s.serialize_str(&term_label(t)),
        None => s.serialize_none(),
    }
}

/// Outcome of checking one instance. `conforms` is derived from the
/// violation list and cannot disagree with it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    conforms: bool,
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new(violations: Vec<Violation>) -> ValidationReport {
        ValidationReport {
            conforms: violations.is_empty(),
            violations,
        }
    }

    pub fn conforms(&self) -> bool {
        self.conforms
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.conforms = self.violations.is_empty();
    }
}
