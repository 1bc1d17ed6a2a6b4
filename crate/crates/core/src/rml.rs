//! Declarative mapping of provider JSON/CSV feeds to RDF.
//!
//! Mappings are JSON documents mirroring the RML term-map model (see
//! `docs/mapping.md`): logical sources, one subject map per triples map,
//! class IRIs, and predicate-object maps whose term maps are constants,
//! references or `{field}` templates.
//!
//! Null handling follows R2RML: a missing field drops the single quad that
//! needs it; a missing subject field drops the whole record.

use std::collections::{BTreeMap, HashMap};

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{is_absolute_iri, Graph, Literal, Quad, Term};
use crate::vocab;

/// Everything except RFC 3986 unreserved characters.
const IRI_SAFE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("mapping error at {path}: {message}")]
pub struct MappingError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("source is not valid JSON: {0}")]
    Json(String),
    #[error("source is not valid CSV: {0}")]
    Csv(String),
}

/// A record whose subject could not be produced.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TermError {
    pub record: usize,
    pub map: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalSource {
    pub source_id: String,
    pub format: SourceFormat,
    /// JSON: `$`-rooted dot/bracket path; CSV: empty.
    pub iterator: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermType {
    Iri,
    Literal,
    BlankNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermMapKind {
    Constant(Term),
    Reference(FieldPath),
    Template(Template),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMap {
    pub kind: TermMapKind,
    pub term_type: TermType,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateObjectMap {
    pub predicate: String,
    pub object_map: TermMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesMap {
    pub id: String,
    pub logical_source: LogicalSource,
    pub subject_map: TermMap,
    pub type_iris: Vec<String>,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

/// `a.b[0].c`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPath {
    raw: String,
    steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Step {
    Key(String),
    Index(usize),
}

impl FieldPath {
    pub fn parse(raw: &str) -> Result<FieldPath, String> {
        if raw.is_empty() {
            return Err("empty field path".into());
        }
        let mut steps = Vec::new();
        let mut key = String::new();
        let mut chars = raw.chars().peekable();
        let mut after_index = false;
        while let Some(c) = chars.next() {
            match c {
                '.' => {
                    if key.is_empty() && !after_index {
                        return Err(format!("empty segment in '{raw}'"));
                    }
                    if !key.is_empty() {
                        steps.push(Step::Key(std::mem::take(&mut key)));
                    }
                    after_index = false;
                    if chars.peek().is_none() {
                        return Err(format!("trailing '.' in '{raw}'"));
                    }
                }
                '[' => {
                    if !key.is_empty() {
                        steps.push(Step::Key(std::mem::take(&mut key)));
                    } else if steps.is_empty() {
                        return Err(format!("index without a field in '{raw}'"));
                    }
                    let mut digits = String::new();
                    loop {
                        match chars.next() {
                            Some(']') => break,
                            Some(d) if d.is_ascii_digit() => digits.push(d),
                            _ => return Err(format!("malformed index in '{raw}'")),
                        }
                    }
                    let index = digits
                        .parse()
                        .map_err(|_| format!("malformed index in '{raw}'"))?;
                    steps.push(Step::Index(index));
                    after_index = true;
                }
                ']' | '{' | '}' | '*' => {
                    return Err(format!("unsupported character '{c}' in '{raw}'"))
                }
                c => {
                    if after_index {
                        return Err(format!("expected '.' or '[' after index in '{raw}'"));
                    }
                    key.push(c);
                }
            }
        }
        if !key.is_empty() {
            steps.push(Step::Key(key));
        }
        Ok(FieldPath {
            raw: raw.to_string(),
            steps,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TemplatePart {
    Text(String),
    Field(FieldPath),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    raw: String,
    parts: Vec<TemplatePart>,
}

impl Template {
    /// `{field}` placeholders; `{{` and `}}` stand for literal braces.
    pub fn parse(raw: &str) -> Result<Template, String> {
        let mut parts = Vec::new();
        let mut text = String::new();
        let mut chars = raw.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' if chars.peek() == Some(&'{') => {
                    chars.next();
                    text.push('{');
                }
                '}' if chars.peek() == Some(&'}') => {
                    chars.next();
                    text.push('}');
                }
                '{' => {
                    let mut field = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some('{') | None => {
                                return Err(format!("unbalanced '{{' in template '{raw}'"))
                            }
                            Some(c) => field.push(c),
                        }
                    }
                    if field.is_empty() {
                        return Err(format!("empty placeholder in template '{raw}'"));
                    }
                    if !text.is_empty() {
                        parts.push(TemplatePart::Text(std::mem::take(&mut text)));
                    }
                    parts.push(TemplatePart::Field(FieldPath::parse(&field)?));
                }
                '}' => return Err(format!("unbalanced '}}' in template '{raw}'")),
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            parts.push(TemplatePart::Text(text));
        }
        Ok(Template {
            raw: raw.to_string(),
            parts,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }
}

// ---- mapping document -------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    prefixes: BTreeMap<String, String>,
    #[serde(default)]
    sources: Vec<RawSource>,
    #[serde(default, rename = "triplesMaps")]
    triples_maps: Vec<RawTriplesMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    id: String,
    format: String,
    #[serde(default)]
    iterator: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriplesMap {
    id: String,
    source: String,
    subject: RawTermMap,
    #[serde(default)]
    types: Vec<String>,
    #[serde(default, rename = "predicateObjects")]
    predicate_objects: Vec<RawPredicateObject>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicateObject {
    predicate: String,
    object: RawTermMap,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTermMap {
    constant: Option<String>,
    reference: Option<String>,
    template: Option<String>,
    #[serde(rename = "termType")]
    term_type: Option<String>,
    datatype: Option<String>,
    language: Option<String>,
}

fn mapping_error(path: impl Into<String>, message: impl Into<String>) -> MappingError {
    MappingError {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a mapping document.
pub fn parse_mapping(doc: &str) -> Result<Vec<TriplesMap>, MappingError> {
    let raw: RawDocument =
        serde_json::from_str(doc).map_err(|e| mapping_error("$", e.to_string()))?;
    let expand = |value: &str, path: &str| -> Result<String, MappingError> {
        if let Some((prefix, local)) = value.split_once(':') {
            if let Some(ns) = raw.prefixes.get(prefix) {
                return Ok(format!("{ns}{local}"));
            }
        }
        if is_absolute_iri(value) {
            Ok(value.to_string())
        } else {
            Err(mapping_error(
                path,
                format!("'{value}' is neither an absolute IRI nor a declared CURIE"),
            ))
        }
    };

    let mut sources = HashMap::new();
    for (i, s) in raw.sources.iter().enumerate() {
        let path = format!("sources[{i}]");
        let format = match s.format.to_ascii_lowercase().as_str() {
            "json" => SourceFormat::Json,
            "csv" => SourceFormat::Csv,
            other => {
                return Err(mapping_error(
                    format!("{path}.format"),
                    format!("unknown source format '{other}'"),
                ))
            }
        };
        match format {
            SourceFormat::Json => {
                parse_iterator(&s.iterator)
                    .map_err(|m| mapping_error(format!("{path}.iterator"), m))?;
            }
            SourceFormat::Csv if !s.iterator.is_empty() => {
                return Err(mapping_error(
                    format!("{path}.iterator"),
                    "CSV sources take no iterator",
                ));
            }
            SourceFormat::Csv => {}
        }
        let source = LogicalSource {
            source_id: s.id.clone(),
            format,
            iterator: s.iterator.clone(),
        };
        if sources.insert(s.id.clone(), source).is_some() {
            return Err(mapping_error(
                path,
                format!("duplicate source id '{}'", s.id),
            ));
        }
    }

    let mut maps = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (i, m) in raw.triples_maps.iter().enumerate() {
        let path = format!("triplesMaps[{i}]");
        if !ids.insert(m.id.clone()) {
            return Err(mapping_error(
                &path,
                format!("duplicate triples map id '{}'", m.id),
            ));
        }
        let logical_source = sources.get(&m.source).cloned().ok_or_else(|| {
            mapping_error(
                format!("{path}.source"),
                format!("undeclared source '{}'", m.source),
            )
        })?;
        let subject_map = term_map(
            &m.subject,
            &format!("{path}.subject"),
            TermType::Iri,
            &expand,
        )?;
        if subject_map.term_type == TermType::Literal {
            return Err(mapping_error(
                format!("{path}.subject.termType"),
                "subjects must be IRIs or blank nodes",
            ));
        }
        let type_iris = m
            .types
            .iter()
            .enumerate()
            .map(|(j, t)| expand(t, &format!("{path}.types[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut predicate_object_maps = Vec::new();
        for (j, po) in m.predicate_objects.iter().enumerate() {
            let po_path = format!("{path}.predicateObjects[{j}]");
            let predicate = expand(&po.predicate, &format!("{po_path}.predicate"))?;
            let object_map = term_map(
                &po.object,
                &format!("{po_path}.object"),
                TermType::Literal,
                &expand,
            )?;
            predicate_object_maps.push(PredicateObjectMap {
                predicate,
                object_map,
            });
        }
        maps.push(TriplesMap {
            id: m.id.clone(),
            logical_source,
            subject_map,
            type_iris,
            predicate_object_maps,
        });
    }
    Ok(maps)
}

fn term_map(
    raw: &RawTermMap,
    path: &str,
    reference_default: TermType,
    expand: &dyn Fn(&str, &str) -> Result<String, MappingError>,
) -> Result<TermMap, MappingError> {
    let populated = [
        raw.constant.is_some(),
        raw.reference.is_some(),
        raw.template.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if populated != 1 {
        return Err(mapping_error(
            path,
            "exactly one of constant, reference, template is required",
        ));
    }
    let explicit_type = match raw.term_type.as_deref() {
        None => None,
        Some("iri") | Some("IRI") => Some(TermType::Iri),
        Some("literal") | Some("Literal") => Some(TermType::Literal),
        Some("blankNode") | Some("BlankNode") => Some(TermType::BlankNode),
        Some(other) => {
            return Err(mapping_error(
                format!("{path}.termType"),
                format!("unknown term type '{other}'"),
            ))
        }
    };
    let datatype = raw
        .datatype
        .as_deref()
        .map(|d| expand(d, &format!("{path}.datatype")))
        .transpose()?;
    let language = raw.language.clone();
    if datatype.is_some() && language.is_some() {
        return Err(mapping_error(
            path,
            "datatype and language are mutually exclusive",
        ));
    }

    let (kind, default_type) = if let Some(c) = &raw.constant {
        let term_type = explicit_type.unwrap_or(TermType::Iri);
        let term = match term_type {
            TermType::Iri => Term::Iri(expand(c, &format!("{path}.constant"))?),
            TermType::Literal => {
                literal_term(c.clone(), None, datatype.as_deref(), language.as_deref())
            }
            TermType::BlankNode => Term::BlankNode(blank_label(c)),
        };
        (TermMapKind::Constant(term), TermType::Iri)
    } else if let Some(r) = &raw.reference {
        let field =
            FieldPath::parse(r).map_err(|m| mapping_error(format!("{path}.reference"), m))?;
        (TermMapKind::Reference(field), reference_default)
    } else {
        let t = raw.template.as_deref().unwrap_or_default();
        let template =
            Template::parse(t).map_err(|m| mapping_error(format!("{path}.template"), m))?;
        (TermMapKind::Template(template), TermType::Iri)
    };
    let term_type = explicit_type.unwrap_or(default_type);
    if term_type != TermType::Literal && (datatype.is_some() || language.is_some()) {
        return Err(mapping_error(
            path,
            "datatype/language only apply to literal term maps",
        ));
    }
    Ok(TermMap {
        kind,
        term_type,
        datatype,
        language,
    })
}

fn parse_iterator(raw: &str) -> Result<Vec<Step>, String> {
    let rest = raw
        .strip_prefix('$')
        .ok_or_else(|| format!("JSON iterator must start with '$', got '{raw}'"))?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    let rest = rest.strip_prefix('.').unwrap_or(rest);
    if rest.starts_with('[') {
        return Err(format!("iterator must select a field first, got '{raw}'"));
    }
    Ok(FieldPath::parse(rest)?.steps)
}

// ---- execution ---------------------------------------------------------------

/// Result of running one triples map over one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MapOutput {
    pub graph: Graph,
    pub records: usize,
    /// Quads dropped because a referenced field was absent.
    pub skipped_quads: usize,
    /// Records dropped because no subject could be produced.
    pub skipped_records: usize,
    pub errors: Vec<TermError>,
}

impl MapOutput {
    pub fn absorb(&mut self, other: MapOutput) {
        self.graph.extend(other.graph);
        self.records += other.records;
        self.skipped_quads += other.skipped_quads;
        self.skipped_records += other.skipped_records;
        self.errors.extend(other.errors);
    }
}

#[derive(Debug, Clone)]
struct Scalar {
    text: String,
    natural_datatype: &'static str,
}

enum Record {
    Json(Value),
    Csv(HashMap<String, String>),
}

impl Record {
    fn values(&self, field: &FieldPath) -> Vec<Scalar> {
        match self {
            Record::Csv(row) => row
                .get(&field.raw)
                .filter(|v| !v.is_empty())
                .map(|v| {
                    vec![Scalar {
                        text: v.clone(),
                        natural_datatype: vocab::XSD_STRING,
                    }]
                })
                .unwrap_or_default(),
            Record::Json(value) => {
                let mut cur = value;
                for step in &field.steps {
                    let next = match (step, cur) {
                        (Step::Key(k), Value::Object(obj)) => obj.get(k),
                        (Step::Index(i), Value::Array(items)) => items.get(*i),
                        _ => None,
                    };
                    match next {
                        Some(v) => cur = v,
                        None => return Vec::new(),
                    }
                }
                match cur {
                    Value::Array(items) => items.iter().filter_map(json_scalar).collect(),
                    other => json_scalar(other).into_iter().collect(),
                }
            }
        }
    }
}

fn json_scalar(value: &Value) -> Option<Scalar> {
    match value {
        Value::String(s) => Some(Scalar {
            text: s.clone(),
            natural_datatype: vocab::XSD_STRING,
        }),
        Value::Bool(b) => Some(Scalar {
            text: b.to_string(),
            natural_datatype: vocab::XSD_BOOLEAN,
        }),
        Value::Number(n) if n.is_i64() || n.is_u64() => Some(Scalar {
            text: n.to_string(),
            natural_datatype: vocab::XSD_INTEGER,
        }),
        Value::Number(n) => Some(Scalar {
            text: n.to_string(),
            natural_datatype: vocab::XSD_DOUBLE,
        }),
        Value::Null | Value::Array(_) | Value::Object(_) => None,
    }
}

fn read_records(source: &LogicalSource, data: &[u8]) -> Result<Vec<Record>, SourceError> {
    match source.format {
        SourceFormat::Json => {
            let doc: Value =
                serde_json::from_slice(data).map_err(|e| SourceError::Json(e.to_string()))?;
            let steps = parse_iterator(&source.iterator).map_err(SourceError::Json)?;
            let mut cur = &doc;
            for step in &steps {
                let next = match (step, cur) {
                    (Step::Key(k), Value::Object(obj)) => obj.get(k),
                    (Step::Index(i), Value::Array(items)) => items.get(*i),
                    _ => None,
                };
                match next {
                    Some(v) => cur = v,
                    None => return Ok(Vec::new()),
                }
            }
            Ok(match cur {
                Value::Array(items) => items.iter().cloned().map(Record::Json).collect(),
                Value::Object(_) => vec![Record::Json(cur.clone())],
                _ => Vec::new(),
            })
        }
        SourceFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(data);
            let headers = reader
                .headers()
                .map_err(|e| SourceError::Csv(e.to_string()))?
                .clone();
            let mut out = Vec::new();
            for row in reader.records() {
                let row = row.map_err(|e| SourceError::Csv(e.to_string()))?;
                let record = headers
                    .iter()
                    .zip(row.iter())
                    .map(|(h, v)| (h.to_string(), v.to_string()))
                    .collect();
                out.push(Record::Csv(record));
            }
            Ok(out)
        }
    }
}

/// Runs `map` over `source_data`, tagging output with `graph`.
pub fn execute(
    map: &TriplesMap,
    source_data: &[u8],
    graph: &Term,
) -> Result<MapOutput, SourceError> {
    let records = read_records(&map.logical_source, source_data)?;
    let mut out = MapOutput {
        records: records.len(),
        ..MapOutput::default()
    };
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    for (index, record) in records.iter().enumerate() {
        let subjects = generate(&map.subject_map, record);
        if subjects.is_empty() {
            out.skipped_records += 1;
            out.errors.push(TermError {
                record: index,
                map: map.id.clone(),
                message: "subject map produced no term".into(),
            });
            continue;
        }
        for subject in &subjects {
            for t in &map.type_iris {
                out.graph.insert(Quad::new(
                    subject.clone(),
                    rdf_type.clone(),
                    Term::Iri(t.clone()),
                    graph.clone(),
                ));
            }
        }
        for po in &map.predicate_object_maps {
            let objects = generate(&po.object_map, record);
            if objects.is_empty() {
                out.skipped_quads += subjects.len();
                continue;
            }
            let predicate = Term::Iri(po.predicate.clone());
            for subject in &subjects {
                for object in &objects {
                    out.graph.insert(Quad::new(
                        subject.clone(),
                        predicate.clone(),
                        object.clone(),
                        graph.clone(),
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Runs every map against its source; `sources` is keyed by source id.
pub fn execute_all(
    maps: &[TriplesMap],
    sources: &HashMap<String, Vec<u8>>,
    graph: &Term,
) -> Result<MapOutput, MappingError> {
    let mut out = MapOutput::default();
    for map in maps {
        let id = &map.logical_source.source_id;
        let data = sources
            .get(id)
            .ok_or_else(|| mapping_error(format!("source {id}"), "no data supplied for source"))?;
        let result = execute(map, data, graph)
            .map_err(|e| mapping_error(format!("source {id}"), e.to_string()))?;
        out.absorb(result);
    }
    Ok(out)
}

fn generate(map: &TermMap, record: &Record) -> Vec<Term> {
    match &map.kind {
        TermMapKind::Constant(term) => vec![term.clone()],
        TermMapKind::Reference(field) => record
            .values(field)
            .into_iter()
            .filter_map(|scalar| {
                let natural = scalar.natural_datatype;
                make_term(map, scalar.text, Some(natural))
            })
            .collect(),
        TermMapKind::Template(template) => {
            let iri_safe = map.term_type == TermType::Iri;
            let mut expansions = vec![String::new()];
            for part in &template.parts {
                match part {
                    TemplatePart::Text(t) => expansions.iter_mut().for_each(|e| e.push_str(t)),
                    TemplatePart::Field(f) => {
                        let values = record.values(f);
                        if values.is_empty() {
                            return Vec::new();
                        }
                        let mut next = Vec::with_capacity(expansions.len() * values.len());
                        for prefix in &expansions {
                            for v in &values {
                                let text = if iri_safe {
                                    utf8_percent_encode(&v.text, IRI_SAFE).to_string()
                                } else {
                                    v.text.clone()
                                };
                                next.push(format!("{prefix}{text}"));
                            }
                        }
                        expansions = next;
                    }
                }
            }
            expansions
                .into_iter()
                .filter_map(|s| make_term(map, s, None))
                .collect()
        }
    }
}

fn make_term(map: &TermMap, text: String, natural: Option<&str>) -> Option<Term> {
    match map.term_type {
        TermType::Iri => is_absolute_iri(&text).then_some(Term::Iri(text)),
        TermType::BlankNode => Some(Term::BlankNode(blank_label(&text))),
        TermType::Literal => Some(literal_term(
            text,
            natural,
            map.datatype.as_deref(),
            map.language.as_deref(),
        )),
    }
}

fn literal_term(
    text: String,
    natural: Option<&str>,
    datatype: Option<&str>,
    language: Option<&str>,
) -> Term {
    if let Some(lang) = language {
        return Term::Literal(Literal::new_lang(text, lang));
    }
    let dt = datatype.or(natural).unwrap_or(vocab::XSD_STRING);
    Term::Literal(Literal::new_typed(text, dt))
}

/// Deterministic blank-node label for a generated value.
fn blank_label(value: &str) -> String {
    if !value.is_empty() && value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        format!("m_{value}")
    } else {
        let digest = Sha256::digest(value.as_bytes());
        let hex: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
        format!("mx{hex}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EVENTS: &str = r#"{
        "prefixes": {"schema": "http://schema.org/"},
        "sources": [{"id": "events", "format": "json", "iterator": "$.events"}],
        "triplesMaps": [{
            "id": "EventMap", "source": "events",
            "subject": {"template": "http://ex/event/{id}"},
            "types": ["schema:Event"],
            "predicateObjects": [{"predicate": "schema:name", "object": {"reference": "title"}}]
        }]
    }"#;

    fn g() -> Term {
        Term::iri(vocab::DEFAULT_GRAPH)
    }

    #[test]
    fn parses_event_map() {
        let maps = parse_mapping(EVENTS).unwrap();
        assert_eq!(maps.len(), 1);
        let m = &maps[0];
        assert_eq!(m.logical_source.iterator, "$.events");
        assert_eq!(m.type_iris, vec!["http://schema.org/Event".to_string()]);
        assert_eq!(m.subject_map.term_type, TermType::Iri);
        assert_eq!(
            m.predicate_object_maps[0].object_map.term_type,
            TermType::Literal
        );
    }

    #[test]
    fn unbalanced_template() {
        let doc = EVENTS.replace("http://ex/event/{id}", "http://ex/{");
        let err = parse_mapping(&doc).unwrap_err();
        assert_eq!(err.path, "triplesMaps[0].subject.template");
        assert!(Template::parse("http://ex/}").is_err());
        assert!(Template::parse("http://ex/{}").is_err());
        let t = Template::parse("http://ex/{{lit}}/{id}").unwrap();
        assert_eq!(t.parts.len(), 2);
    }

    #[test]
    fn empty_map_list() {
        assert!(parse_mapping(r#"{"triplesMaps": []}"#).unwrap().is_empty());
        assert!(parse_mapping("{}").unwrap().is_empty());
    }

    #[test]
    fn undeclared_source_and_bad_kinds() {
        let doc = EVENTS.replace("\"source\": \"events\"", "\"source\": \"nope\"");
        assert_eq!(
            parse_mapping(&doc).unwrap_err().path,
            "triplesMaps[0].source"
        );
        let doc = EVENTS.replace(
            r#"{"reference": "title"}"#,
            r#"{"reference": "title", "template": "x{y}"}"#,
        );
        assert!(parse_mapping(&doc).is_err());
        let doc = EVENTS.replace(
            r#"{"reference": "title"}"#,
            r#"{"reference": "title", "termType": "triple"}"#,
        );
        assert!(parse_mapping(&doc).is_err());
        let doc = EVENTS.replace(
            r#""template": "http://ex/event/{id}""#,
            r#""reference": "id", "termType": "literal""#,
        );
        assert!(parse_mapping(&doc).is_err());
    }

    #[test]
    fn executes_record() {
        let maps = parse_mapping(EVENTS).unwrap();
        let out = execute(
            &maps[0],
            br#"{"events":[{"id":"7","title":"Messe"}]}"#,
            &g(),
        )
        .unwrap();
        let expected: Graph = [
            Quad::new(
                Term::iri("http://ex/event/7"),
                Term::iri(vocab::RDF_TYPE),
                Term::iri("http://schema.org/Event"),
                g(),
            ),
            Quad::new(
                Term::iri("http://ex/event/7"),
                Term::iri(vocab::SCHEMA_NAME),
                Term::string("Messe"),
                g(),
            ),
        ]
        .into_iter()
        .collect();
        assert_eq!(out.graph, expected);
        assert_eq!(out.skipped_quads, 0);
    }

    #[test]
    fn missing_optional_field_skips_quad() {
        let maps = parse_mapping(EVENTS).unwrap();
        let out = execute(&maps[0], br#"{"events":[{"id":"7"}]}"#, &g()).unwrap();
        assert_eq!(out.graph.len(), 1);
        assert_eq!(out.skipped_quads, 1);
    }

    #[test]
    fn missing_subject_field_skips_record() {
        let maps = parse_mapping(EVENTS).unwrap();
        let out = execute(
            &maps[0],
            br#"{"events":[{"title":"x"},{"id":"8","title":"y"}]}"#,
            &g(),
        )
        .unwrap();
        assert_eq!(out.skipped_records, 1);
        assert_eq!(
            out.errors,
            vec![TermError {
                record: 0,
                map: "EventMap".into(),
                message: "subject map produced no term".into()
            }]
        );
        assert_eq!(out.graph.len(), 2);
    }

    #[test]
    fn csv_percent_encodes_template_values() {
        let doc = r#"{
            "sources": [{"id": "pois", "format": "csv"}],
            "triplesMaps": [{"id": "PoiMap", "source": "pois",
                "subject": {"template": "http://ex/poi/{ref}"},
                "types": ["http://schema.org/Place"]}]
        }"#;
        let maps = parse_mapping(doc).unwrap();
        let csv = b"ref,name\na b,A\nc,C\nd/e,D\n";
        let out = execute(&maps[0], csv, &g()).unwrap();
        let subjects: Vec<String> = out
            .graph
            .subjects()
            .iter()
            .map(|s| s.as_iri().unwrap().to_string())
            .collect();
        assert_eq!(subjects.len(), 3);
        assert!(subjects.contains(&"http://ex/poi/a%20b".to_string()));
        assert!(subjects.contains(&"http://ex/poi/d%2Fe".to_string()));
    }

    #[test]
    fn natural_datatypes_and_nested_paths() {
        let doc = r#"{
            "prefixes": {"schema": "http://schema.org/", "xsd": "http://www.w3.org/2001/XMLSchema#"},
            "sources": [{"id": "s", "format": "json", "iterator": "$.data.items"}],
            "triplesMaps": [
              {"id": "Poi", "source": "s", "subject": {"template": "http://ex/poi/{id}"},
               "predicateObjects": [
                 {"predicate": "schema:geo", "object": {"template": "geo{id}", "termType": "blankNode"}},
                 {"predicate": "schema:name", "object": {"reference": "names[0]", "language": "de"}},
                 {"predicate": "schema:keywords", "object": {"reference": "tags"}},
                 {"predicate": "schema:url", "object": {"reference": "web", "termType": "iri"}},
                 {"predicate": "schema:startDate", "object": {"reference": "date", "datatype": "xsd:date"}}
               ]},
              {"id": "Geo", "source": "s", "subject": {"template": "geo{id}", "termType": "blankNode"},
               "predicateObjects": [
                 {"predicate": "schema:latitude", "object": {"reference": "pos.lat"}},
                 {"predicate": "schema:longitude", "object": {"reference": "pos.lon"}}
               ]}
            ]
        }"#;
        let maps = parse_mapping(doc).unwrap();
        let data = br#"{"data":{"items":[{"id":1,"names":["Turm","Tower"],"tags":["a","b"],
            "web":"https://ex.org","date":"2024-03-07","pos":{"lat":48.5,"lon":11}}]}}"#;
        let mut sources = HashMap::new();
        sources.insert("s".to_string(), data.to_vec());
        let out = execute_all(&maps, &sources, &g()).unwrap();
        let poi = Term::iri("http://ex/poi/1");
        let geo = out
            .graph
            .objects(&poi, vocab::SCHEMA_GEO)
            .next()
            .unwrap()
            .clone();
        assert!(geo.is_blank());
        assert_eq!(
            out.graph.objects(&geo, vocab::SCHEMA_LATITUDE).next(),
            Some(&Term::typed("48.5", vocab::XSD_DOUBLE))
        );
        assert_eq!(
            out.graph.objects(&geo, vocab::SCHEMA_LONGITUDE).next(),
            Some(&Term::typed("11", vocab::XSD_INTEGER))
        );
        assert_eq!(
            out.graph.objects(&poi, vocab::SCHEMA_NAME).next(),
            Some(&Term::lang("Turm", "de"))
        );
        assert_eq!(
            out.graph
                .objects(&poi, "http://schema.org/keywords")
                .count(),
            2
        );
        assert_eq!(
            out.graph.objects(&poi, "http://schema.org/url").next(),
            Some(&Term::iri("https://ex.org"))
        );
        assert_eq!(
            out.graph
                .objects(&poi, "http://schema.org/startDate")
                .next(),
            Some(&Term::typed("2024-03-07", vocab::XSD_DATE))
        );
    }

    #[test]
    fn unparseable_source() {
        let maps = parse_mapping(EVENTS).unwrap();
        assert!(matches!(
            execute(&maps[0], b"{not json", &g()),
            Err(SourceError::Json(_))
        ));
        assert_eq!(execute(&maps[0], b"{}", &g()).unwrap().records, 0);
    }

    #[test]
    fn field_paths() {
        assert!(FieldPath::parse("a.b[0].c").is_ok());
        assert!(FieldPath::parse("a..b").is_err());
        assert!(FieldPath::parse("a[x]").is_err());
        assert!(FieldPath::parse("a.*").is_err());
        assert!(FieldPath::parse("").is_err());
    }
}
