use std::collections::BTreeSet;
use std::fmt;

use crate::vocab;

/// An RDF term.
///
/// The derived ordering (IRIs, then blank nodes, then literals) is what the
/// store indexes use; serializers that need the textual order sort on
/// [`Term::to_string`] instead.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: String,
    language: Option<String>,
}

impl Literal {
    pub fn new_typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        debug_assert!(datatype != vocab::RDF_LANG_STRING, "langString needs a tag");
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }

    pub fn new_string(lexical: impl Into<String>) -> Self {
        Self::new_typed(lexical, vocab::XSD_STRING)
    }

    pub fn new_lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::RDF_LANG_STRING.to_string(),
            language: Some(language.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Numeric value for the XSD numeric datatypes.
    pub fn as_f64(&self) -> Option<f64> {
        match self.datatype.as_str() {
            vocab::XSD_INTEGER | vocab::XSD_DECIMAL | vocab::XSD_NON_NEGATIVE_INTEGER => {
                self.lexical.trim().parse::<f64>().ok()
            }
            vocab::XSD_DOUBLE | vocab::XSD_FLOAT => match self.lexical.trim() {
                "INF" => Some(f64::INFINITY),
                "-INF" => Some(f64::NEG_INFINITY),
                "NaN" => Some(f64::NAN),
                other => other.parse::<f64>().ok(),
            },
            _ => None,
        }
    }
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Term {
        let iri = iri.into();
        debug_assert!(is_absolute_iri(&iri), "relative IRI {iri:?}");
        Term::Iri(iri)
    }

    pub fn blank(label: impl Into<String>) -> Term {
        let label = label.into();
        debug_assert!(is_valid_blank_label(&label), "bad blank label {label:?}");
        Term::BlankNode(label)
    }

    pub fn string(lexical: impl Into<String>) -> Term {
        Term::Literal(Literal::new_string(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal(Literal::new_typed(lexical, datatype))
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Term {
        Term::Literal(Literal::new_lang(lexical, language))
    }

    pub fn integer(value: i64) -> Term {
        Term::typed(value.to_string(), vocab::XSD_INTEGER)
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl fmt::Display for Term {
    /// N-Triples form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write_iri(f, iri),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                write_escaped_string(f, &lit.lexical)?;
                f.write_str("\"")?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if lit.datatype == vocab::XSD_STRING {
                    Ok(())
                } else {
                    f.write_str("^^")?;
                    write_iri(f, &lit.datatype)
                }
            }
        }
    }
}

pub(crate) fn write_iri(f: &mut impl fmt::Write, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            c if (c as u32) <= 0x20 => write!(f, "\\u{:04X}", c as u32)?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('>')
}

pub(crate) fn write_escaped_string(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c if (c as u32) < 0x20 || c == '\u{7f}' => write!(f, "\\u{:04X}", c as u32)?,
            c => f.write_char(c)?,
        }
    }
    Ok(())
}

/// `scheme ":" ...` with an RFC 3986 scheme.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

pub fn is_valid_blank_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quad {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub graph: Term,
}

impl Quad {
    pub fn new(subject: Term, predicate: Term, object: Term, graph: Term) -> Quad {
        debug_assert!(!subject.is_literal(), "literal subject");
        debug_assert!(predicate.is_iri(), "non-IRI predicate");
        debug_assert!(graph.is_iri(), "non-IRI graph");
        Quad {
            subject,
            predicate,
            object,
            graph,
        }
    }

    pub fn with_graph(&self, graph: &Term) -> Quad {
        Quad {
            graph: graph.clone(),
            ..self.clone()
        }
    }
}

/// A duplicate-free set of quads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    quads: BTreeSet<Quad>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    /// Returns false when the quad was already present.
    pub fn insert(&mut self, quad: Quad) -> bool {
        self.quads.insert(quad)
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        self.quads.remove(quad)
    }

    pub fn contains(&self, quad: &Quad) -> bool {
        self.quads.contains(quad)
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Quad> + '_ {
        self.quads.iter()
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Quad>) {
        self.quads.extend(other);
    }

    /// All quads with the given subject, in term order.
    pub fn with_subject<'a>(&'a self, subject: &'a Term) -> impl Iterator<Item = &'a Quad> + 'a {
        let lower = Quad {
            subject: subject.clone(),
            predicate: Term::Iri(String::new()),
            object: Term::Iri(String::new()),
            graph: Term::Iri(String::new()),
        };
        self.quads
            .range(lower..)
            .take_while(move |q| &q.subject == subject)
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.with_subject(subject)
            .filter(move |q| q.predicate.as_iri() == Some(predicate))
            .map(|q| &q.object)
    }

    pub fn subjects(&self) -> BTreeSet<&Term> {
        self.quads.iter().map(|q| &q.subject).collect()
    }

    /// Same triples, every quad moved into `graph`.
    pub fn retagged(&self, graph: &Term) -> Graph {
        self.quads.iter().map(|q| q.with_graph(graph)).collect()
    }
}

impl FromIterator<Quad> for Graph {
    fn from_iter<I: IntoIterator<Item = Quad>>(iter: I) -> Self {
        Graph {
            quads: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for Graph {
    type Item = Quad;
    type IntoIter = std::collections::btree_set::IntoIter<Quad>;

    fn into_iter(self) -> Self::IntoIter {
        self.quads.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Quad;
    type IntoIter = std::collections::btree_set::Iter<'a, Quad>;

    fn into_iter(self) -> Self::IntoIter {
        self.quads.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_iris() {
        assert!(is_absolute_iri("http://ex/a"));
        assert!(is_absolute_iri("urn:tkg:default"));
        assert!(!is_absolute_iri("ex/a"));
        assert!(!is_absolute_iri(":a"));
        assert!(!is_absolute_iri("1a:b"));
    }

    #[test]
    fn graph_has_set_semantics() {
        let g = Term::iri(vocab::DEFAULT_GRAPH);
        let q = Quad::new(
            Term::iri("http://ex/a"),
            Term::iri("http://ex/p"),
            Term::string("x"),
            g,
        );
        let mut graph = Graph::new();
        assert!(graph.insert(q.clone()));
        assert!(!graph.insert(q));
        assert_eq!(graph.len(), 1);
    }

    #[test]
    fn literal_display_escapes() {
        let t = Term::lang("a \"b\"\n", "de");
        assert_eq!(t.to_string(), "\"a \\\"b\\\"\\n\"@de");
        assert_eq!(
            Term::integer(5).to_string(),
            format!("\"5\"^^<{}>", vocab::XSD_INTEGER)
        );
    }

    #[test]
    fn with_subject_ranges() {
        let g = Term::iri(vocab::DEFAULT_GRAPH);
        let a = Term::iri("http://ex/a");
        let b = Term::blank("b0");
        let p = Term::iri("http://ex/p");
        let graph: Graph = [
            Quad::new(a.clone(), p.clone(), Term::string("1"), g.clone()),
            Quad::new(a.clone(), p.clone(), b.clone(), g.clone()),
            Quad::new(b.clone(), p.clone(), Term::string("2"), g.clone()),
        ]
        .into_iter()
        .collect();
        assert_eq!(graph.with_subject(&a).count(), 2);
        assert_eq!(graph.with_subject(&b).count(), 1);
        assert_eq!(graph.objects(&a, "http://ex/p").count(), 2);
    }
}
