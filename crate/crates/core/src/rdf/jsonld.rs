//! Restricted JSON-LD profile.
//!
//! Accepted: a top-level object or array of objects; `@context` on top-level
//! objects only, holding a prefix/term map and `@vocab`; `@id`, `@type`,
//! nested node objects, arrays of values, and value objects built from
//! `@value` with `@type` or `@language`. Any other keyword is a
//! [`ParseError::ProfileViolation`].

use std::collections::{BTreeMap, HashMap};

use serde_json::{Map, Value};

use super::term::{is_absolute_iri, Graph, Literal, Quad, Term};
use super::ParseError;
use crate::vocab;

pub fn parse_jsonld_profile(text: &str, graph: &Term) -> Result<Graph, ParseError> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| ParseError::syntax(e.line(), e.column(), e.to_string()))?;
    let mut state = State {
        graph: graph.clone(),
        out: Graph::new(),
        blank_labels: HashMap::new(),
        blank_counter: 0,
    };
    match doc {
        Value::Object(obj) => state.top_level(&obj)?,
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Object(obj) => state.top_level(&obj)?,
                    _ => {
                        return Err(ParseError::ProfileViolation {
                            feature: "non-object top-level array item".into(),
                        })
                    }
                }
            }
        }
        _ => {
            return Err(ParseError::ProfileViolation {
                feature: "non-object top-level value".into(),
            })
        }
    }
    Ok(state.out)
}

#[derive(Debug, Default)]
struct Context {
    vocab: Option<String>,
    terms: HashMap<String, String>,
}

impl Context {
    fn parse(value: &Value) -> Result<Context, ParseError> {
        let obj = match value {
            Value::Object(obj) => obj,
            Value::String(_) => return Err(violation("remote context")),
            Value::Array(_) => return Err(violation("@context array")),
            Value::Null => return Ok(Context::default()),
            _ => return Err(violation("@context value")),
        };
        let mut ctx = Context::default();
        for (key, value) in obj {
            match (key.as_str(), value) {
                ("@vocab", Value::String(iri)) => {
                    if !is_absolute_iri(iri) {
                        return Err(violation("relative @vocab"));
                    }
                    ctx.vocab = Some(iri.clone());
                }
                (k, _) if k.starts_with('@') => return Err(violation(k)),
                (k, Value::String(iri)) => {
                    ctx.terms.insert(k.to_string(), iri.clone());
                }
                (_, Value::Object(_)) => return Err(violation("expanded term definition")),
                (k, _) => return Err(violation(&format!("context entry '{k}'"))),
            }
        }
        Ok(ctx)
    }

    /// Expands a compact IRI or absolute IRI (no vocab fallback).
    fn expand_id(&self, value: &str) -> Option<String> {
        if let Some((prefix, local)) = value.split_once(':') {
            if let Some(ns) = self.terms.get(prefix) {
                return Some(format!("{ns}{local}"));
            }
            if is_absolute_iri(value) {
                return Some(value.to_string());
            }
        }
        None
    }

    /// Expands a property key or type name: term, compact IRI, absolute IRI,
    /// then `@vocab`.
    fn expand_vocab(&self, value: &str) -> Option<String> {
        if let Some(iri) = self.terms.get(value) {
            if let Some(expanded) = self.expand_id(iri) {
                return Some(expanded);
            }
        }
        if value.contains(':') {
            return self.expand_id(value);
        }
        self.vocab.as_ref().map(|v| format!("{v}{value}"))
    }
}

fn violation(feature: &str) -> ParseError {
    ParseError::ProfileViolation {
        feature: feature.to_string(),
    }
}

struct State {
    graph: Term,
    out: Graph,
    blank_labels: HashMap<String, Term>,
    blank_counter: usize,
}

impl State {
    fn top_level(&mut self, obj: &Map<String, Value>) -> Result<(), ParseError> {
        let ctx = match obj.get("@context") {
            Some(value) => Context::parse(value)?,
            None => Context::default(),
        };
        self.node(obj, &ctx)?;
        Ok(())
    }

    fn fresh_blank(&mut self) -> Term {
        let term = Term::BlankNode(format!("b{}", self.blank_counter));
        self.blank_counter += 1;
        term
    }

    fn blank_for_label(&mut self, label: &str) -> Term {
        if let Some(term) = self.blank_labels.get(label) {
            return term.clone();
        }
        let term = self.fresh_blank();
        self.blank_labels.insert(label.to_string(), term.clone());
        term
    }

    fn node(&mut self, obj: &Map<String, Value>, ctx: &Context) -> Result<Term, ParseError> {
        let subject = match obj.get("@id") {
            Some(Value::String(id)) => match id.strip_prefix("_:") {
                Some(label) => self.blank_for_label(label),
                None => Term::Iri(
                    ctx.expand_id(id)
                        .ok_or_else(|| ParseError::MissingContext { key: id.clone() })?,
                ),
            },
            Some(_) => return Err(violation("non-string @id")),
            None => self.fresh_blank(),
        };
        for (key, value) in obj {
            match key.as_str() {
                "@id" | "@context" => {}
                "@type" => {
                    let names: Vec<&Value> = match value {
                        Value::Array(items) => items.iter().collect(),
                        other => vec![other],
                    };
                    for name in names {
                        let Value::String(name) = name else {
                            return Err(violation("non-string @type"));
                        };
                        let iri = ctx
                            .expand_vocab(name)
                            .ok_or_else(|| ParseError::MissingContext { key: name.clone() })?;
                        self.emit(subject.clone(), vocab::RDF_TYPE, Term::Iri(iri));
                    }
                }
                k if k.starts_with('@') => return Err(violation(k)),
                k => {
                    let predicate = ctx
                        .expand_vocab(k)
                        .ok_or_else(|| ParseError::MissingContext { key: k.to_string() })?;
                    let objects = self.values(value, ctx, false)?;
                    for object in objects {
                        self.emit(subject.clone(), &predicate, object);
                    }
                }
            }
        }
        Ok(subject)
    }

    fn values(
        &mut self,
        value: &Value,
        ctx: &Context,
        in_array: bool,
    ) -> Result<Vec<Term>, ParseError> {
        Ok(match value {
            Value::Null => vec![],
            Value::Bool(b) => vec![Term::typed(b.to_string(), vocab::XSD_BOOLEAN)],
            Value::Number(n) => vec![number_literal(n)],
            Value::String(s) => vec![Term::string(s.clone())],
            Value::Array(items) => {
                if in_array {
                    return Err(violation("nested array"));
                }
                let mut out = Vec::new();
                for item in items {
                    out.extend(self.values(item, ctx, true)?);
                }
                out
            }
            Value::Object(obj) => {
                if obj.contains_key("@context") {
                    return Err(violation("nested @context"));
                }
                if obj.contains_key("@value") {
                    vec![value_object(obj, ctx)?]
                } else {
                    vec![self.node(obj, ctx)?]
                }
            }
        })
    }

    fn emit(&mut self, subject: Term, predicate: &str, object: Term) {
        self.out.insert(Quad::new(
            subject,
            Term::Iri(predicate.to_string()),
            object,
            self.graph.clone(),
        ));
    }
}

fn number_literal(n: &serde_json::Number) -> Term {
    if n.is_i64() || n.is_u64() {
        Term::typed(n.to_string(), vocab::XSD_INTEGER)
    } else {
        Term::typed(n.to_string(), vocab::XSD_DOUBLE)
    }
}

fn value_object(obj: &Map<String, Value>, ctx: &Context) -> Result<Term, ParseError> {
    for key in obj.keys() {
        if !matches!(key.as_str(), "@value" | "@type" | "@language") {
            return Err(violation(&format!("{key} in value object")));
        }
    }
    let lexical = match &obj["@value"] {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => return Err(violation("non-scalar @value")),
    };
    match (obj.get("@type"), obj.get("@language")) {
        (Some(_), Some(_)) => Err(violation("@type with @language")),
        (Some(Value::String(dt)), None) => {
            let dt = ctx
                .expand_vocab(dt)
                .ok_or_else(|| ParseError::MissingContext { key: dt.clone() })?;
            if dt == vocab::RDF_LANG_STRING {
                return Err(violation("rdf:langString without @language"));
            }
            Ok(Term::Literal(Literal::new_typed(lexical, dt)))
        }
        (None, Some(Value::String(lang))) => {
            Ok(Term::Literal(Literal::new_lang(lexical, lang.clone())))
        }
        (None, None) => match &obj["@value"] {
            Value::Number(n) => Ok(number_literal(n)),
            Value::Bool(b) => Ok(Term::typed(b.to_string(), vocab::XSD_BOOLEAN)),
            _ => Ok(Term::string(lexical)),
        },
        _ => Err(violation("non-string @type/@language in value object")),
    }
}

/// Subject, values per predicate, and type IRIs of one node object.
type NodeEntry = (Term, BTreeMap<String, Vec<Value>>, Vec<String>);

/// One node object per subject, keys as absolute IRIs, no context.
pub fn serialize_jsonld(graph: &Graph) -> String {
    let mut nodes: BTreeMap<String, NodeEntry> = BTreeMap::new();
    for q in graph.iter() {
        let entry = nodes
            .entry(q.subject.to_string())
            .or_insert_with(|| (q.subject.clone(), BTreeMap::new(), Vec::new()));
        let predicate = q.predicate.as_iri().unwrap_or_default().to_string();
        if predicate == vocab::RDF_TYPE {
            if let Term::Iri(t) = &q.object {
                entry.2.push(t.clone());
                continue;
            }
        }
        entry
            .1
            .entry(predicate)
            .or_default()
            .push(term_value(&q.object));
    }
    let mut out = Vec::new();
    for (_, (subject, props, mut types)) in nodes {
        let mut obj = Map::new();
        obj.insert("@id".into(), Value::String(node_id(&subject)));
        if !types.is_empty() {
            types.sort();
            types.dedup();
            obj.insert(
                "@type".into(),
                Value::Array(types.into_iter().map(Value::String).collect()),
            );
        }
        for (p, values) in props {
            obj.insert(p, Value::Array(values));
        }
        out.push(Value::Object(obj));
    }
    serde_json::to_string_pretty(&Value::Array(out)).expect("JSON values serialize")
}

fn node_id(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.clone(),
        Term::BlankNode(label) => format!("_:{label}"),
        Term::Literal(_) => unreachable!("literal subject"),
    }
}

fn term_value(term: &Term) -> Value {
    let mut obj = Map::new();
    match term {
        Term::Iri(_) | Term::BlankNode(_) => {
            obj.insert("@id".into(), Value::String(node_id(term)));
        }
        Term::Literal(lit) => {
            if lit.datatype() == vocab::XSD_STRING {
                return Value::String(lit.lexical().to_string());
            }
            obj.insert("@value".into(), Value::String(lit.lexical().to_string()));
            match lit.language() {
                Some(lang) => obj.insert("@language".into(), Value::String(lang.to_string())),
                None => obj.insert("@type".into(), Value::String(lit.datatype().to_string())),
            };
        }
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Term {
        Term::iri(vocab::DEFAULT_GRAPH)
    }

    #[test]
    fn event_with_vocab() {
        let doc = r#"{"@context":{"@vocab":"http://schema.org/"},"@id":"http://ex/e1","@type":"Event","name":"Fest"}"#;
        let graph = parse_jsonld_profile(doc, &g()).unwrap();
        assert_eq!(graph.len(), 2);
        let e1 = Term::iri("http://ex/e1");
        assert_eq!(
            graph.objects(&e1, vocab::RDF_TYPE).collect::<Vec<_>>(),
            vec![&Term::iri("http://schema.org/Event")]
        );
        assert_eq!(
            graph.objects(&e1, vocab::SCHEMA_NAME).collect::<Vec<_>>(),
            vec![&Term::string("Fest")]
        );
    }

    #[test]
    fn reverse_is_a_violation() {
        let doc =
            r#"{"@context":{"@vocab":"http://schema.org/"},"@id":"http://ex/e1","@reverse":{}}"#;
        assert_eq!(
            parse_jsonld_profile(doc, &g()).unwrap_err(),
            ParseError::ProfileViolation {
                feature: "@reverse".into()
            }
        );
        let doc = r#"{"@graph":[]}"#;
        assert!(matches!(
            parse_jsonld_profile(doc, &g()),
            Err(ParseError::ProfileViolation { .. })
        ));
        let doc = r#"{"@context":"http://schema.org/","name":"x"}"#;
        assert!(matches!(
            parse_jsonld_profile(doc, &g()),
            Err(ParseError::ProfileViolation { .. })
        ));
    }

    #[test]
    fn missing_context() {
        let doc = r#"{"@id":"http://ex/e1","name":"x"}"#;
        assert_eq!(
            parse_jsonld_profile(doc, &g()).unwrap_err(),
            ParseError::MissingContext { key: "name".into() }
        );
    }

    #[test]
    fn malformed_json_is_syntax_error() {
        let err = parse_jsonld_profile("{\n \"a\": }", &g()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn scalar_datatypes() {
        let doc = r#"{"@context":{"@vocab":"http://ex/"},"@id":"http://ex/a",
            "i":3,"d":2.5,"b":true,"s":"x","n":null,"l":{"@value":"Hallo","@language":"de"},
            "t":{"@value":"2024-03-07","@type":"http://www.w3.org/2001/XMLSchema#date"}}"#;
        let graph = parse_jsonld_profile(doc, &g()).unwrap();
        let a = Term::iri("http://ex/a");
        let obj = |p: &str| graph.objects(&a, p).next().cloned();
        assert_eq!(
            obj("http://ex/i"),
            Some(Term::typed("3", vocab::XSD_INTEGER))
        );
        assert_eq!(
            obj("http://ex/d"),
            Some(Term::typed("2.5", vocab::XSD_DOUBLE))
        );
        assert_eq!(
            obj("http://ex/b"),
            Some(Term::typed("true", vocab::XSD_BOOLEAN))
        );
        assert_eq!(obj("http://ex/s"), Some(Term::string("x")));
        assert_eq!(obj("http://ex/n"), None);
        assert_eq!(obj("http://ex/l"), Some(Term::lang("Hallo", "de")));
        assert_eq!(
            obj("http://ex/t"),
            Some(Term::typed("2024-03-07", vocab::XSD_DATE))
        );
        assert_eq!(graph.len(), 6);
    }

    #[test]
    fn compact_iris_and_arrays() {
        let doc = r#"[{"@context":{"schema":"http://schema.org/","odta":"https://odta.io/voc/"},
            "@id":"http://ex/t1","@type":["odta:Trail","schema:Place"],"schema:name":["A","B"]}]"#;
        let graph = parse_jsonld_profile(doc, &g()).unwrap();
        assert_eq!(graph.len(), 4);
        assert!(graph
            .iter()
            .any(|q| q.object == Term::iri("https://odta.io/voc/Trail")));
    }

    #[test]
    fn serialization_reparses() {
        let doc = r#"{"@context":{"@vocab":"http://schema.org/"},"@id":"http://ex/p1","@type":"Place",
            "geo":{"latitude":48.0,"longitude":11.0},"name":{"@value":"Platz","@language":"de"}}"#;
        let graph = parse_jsonld_profile(doc, &g()).unwrap();
        let out = serialize_jsonld(&graph);
        let again = parse_jsonld_profile(&out, &g()).unwrap();
        assert!(crate::rdf::is_isomorphic(&graph, &again));
        assert_eq!(serialize_jsonld(&Graph::new()), "[]");
    }
}
