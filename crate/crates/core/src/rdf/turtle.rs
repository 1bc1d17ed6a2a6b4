//! Turtle subset: `@prefix`/`PREFIX`, prefixed names, `a`, predicate and
//! object lists, `[...]`, `(...)`, `_:label`, and quoted literals with an
//! optional language tag or datatype. No `@base`, no relative IRIs, no
//! numeric or boolean shorthand.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::lexer::Cursor;
use super::term::{write_escaped_string, write_iri, Graph, Literal, Quad, Term};
use super::ParseError;
use crate::vocab;

pub fn parse_turtle_subset(text: &str, graph: &Term) -> Result<Graph, ParseError> {
    let mut parser = TurtleParser {
        cursor: Cursor::new(text),
        prefixes: HashMap::new(),
        blank_labels: HashMap::new(),
        blank_counter: 0,
        graph: graph.clone(),
        out: Graph::new(),
    };
    parser.document()?;
    Ok(parser.out)
}

struct TurtleParser<'a> {
    cursor: Cursor<'a>,
    prefixes: HashMap<String, String>,
    blank_labels: HashMap<String, Term>,
    blank_counter: usize,
    graph: Term,
    out: Graph,
}

impl TurtleParser<'_> {
    fn document(&mut self) -> Result<(), ParseError> {
        loop {
            self.cursor.skip_ws_and_comments();
            if self.cursor.peek().is_none() {
                return Ok(());
            }
            if self.cursor.starts_with("@prefix") {
                self.cursor.eat_str("@prefix");
                self.prefix_decl()?;
                self.ws();
                self.cursor.expect('.')?;
            } else if self.keyword_ahead("PREFIX") {
                self.cursor.eat_str("PREFIX");
                self.prefix_decl()?;
            } else if self.cursor.starts_with("@base") || self.keyword_ahead("BASE") {
                return Err(self.cursor.error("base IRIs are not supported"));
            } else {
                self.triples()?;
                self.ws();
                self.cursor.expect('.')?;
            }
        }
    }

    fn keyword_ahead(&self, kw: &str) -> bool {
        let n = kw.len();
        self.cursor.starts_with(kw) && self.cursor.peek_nth(n).is_some_and(char::is_whitespace)
    }

    fn ws(&mut self) {
        self.cursor.skip_ws_and_comments();
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        self.ws();
        let mut name = String::new();
        while let Some(c) = self.cursor.peek() {
            if c == ':' {
                break;
            }
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                name.push(c);
                self.cursor.next();
            } else {
                return Err(self
                    .cursor
                    .error(format!("invalid character '{c}' in prefix name")));
            }
        }
        self.cursor.expect(':')?;
        self.ws();
        let iri = self.cursor.read_iriref()?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn triples(&mut self) -> Result<(), ParseError> {
        let subject = match self.cursor.peek() {
            Some('[') => {
                let node = self.blank_property_list()?;
                self.ws();
                if self.cursor.peek() == Some('.') {
                    return Ok(());
                }
                node
            }
            Some('(') => self.collection()?,
            Some('"') | Some('\'') => return Err(self.cursor.error("literal in subject position")),
            _ => self.resource_or_blank()?,
        };
        self.predicate_object_list(&subject)
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), ParseError> {
        loop {
            self.ws();
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.ws();
            if !self.cursor.eat(';') {
                return Ok(());
            }
            // repeated or trailing semicolons
            loop {
                self.ws();
                if !self.cursor.eat(';') {
                    break;
                }
            }
            self.ws();
            if matches!(self.cursor.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Term, ParseError> {
        if self.cursor.peek() == Some('a')
            && !self
                .cursor
                .peek_nth(1)
                .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
        {
            self.cursor.next();
            return Ok(Term::iri(vocab::RDF_TYPE));
        }
        match self.cursor.peek() {
            Some('<') => Ok(Term::Iri(self.cursor.read_iriref()?)),
            _ => {
                let iri = self.prefixed_name()?;
                Ok(Term::Iri(iri))
            }
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> Result<(), ParseError> {
        loop {
            self.ws();
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object);
            self.ws();
            if !self.cursor.eat(',') {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, ParseError> {
        match self.cursor.peek() {
            Some('[') => self.blank_property_list(),
            Some('(') => self.collection(),
            Some('"') | Some('\'') => self.literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-') => Err(self
                .cursor
                .error("numeric shorthand literals are not supported; use a typed literal")),
            Some('t') if self.boolean_ahead("true") => Err(self
                .cursor
                .error("boolean shorthand literals are not supported; use a typed literal")),
            Some('f') if self.boolean_ahead("false") => Err(self
                .cursor
                .error("boolean shorthand literals are not supported; use a typed literal")),
            _ => self.resource_or_blank(),
        }
    }

    fn boolean_ahead(&self, word: &str) -> bool {
        self.cursor.starts_with(word)
            && !self
                .cursor
                .peek_nth(word.len())
                .is_some_and(|c| c.is_alphanumeric() || matches!(c, ':' | '_' | '-'))
    }

    fn resource_or_blank(&mut self) -> Result<Term, ParseError> {
        match self.cursor.peek() {
            Some('<') => Ok(Term::Iri(self.cursor.read_iriref()?)),
            Some('_') if self.cursor.peek_nth(1) == Some(':') => {
                self.cursor.eat_str("_:");
                let label = self.cursor.read_blank_label()?;
                if let Some(term) = self.blank_labels.get(&label) {
                    return Ok(term.clone());
                }
                let term = self.fresh_blank();
                self.blank_labels.insert(label, term.clone());
                Ok(term)
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.cursor.error("unexpected end of input")),
        }
    }

    fn fresh_blank(&mut self) -> Term {
        let term = Term::BlankNode(format!("b{}", self.blank_counter));
        self.blank_counter += 1;
        term
    }

    fn blank_property_list(&mut self) -> Result<Term, ParseError> {
        self.cursor.expect('[')?;
        let node = self.fresh_blank();
        self.ws();
        if !self.cursor.eat(']') {
            self.predicate_object_list(&node)?;
            self.ws();
            self.cursor.expect(']')?;
        }
        Ok(node)
    }

    fn collection(&mut self) -> Result<Term, ParseError> {
        self.cursor.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.ws();
            if self.cursor.eat(')') {
                break;
            }
            if self.cursor.peek().is_none() {
                return Err(self.cursor.error("unterminated collection"));
            }
            items.push(self.object()?);
        }
        if items.is_empty() {
            return Ok(Term::iri(vocab::RDF_NIL));
        }
        let cells: Vec<Term> = items.iter().map(|_| self.fresh_blank()).collect();
        for (i, item) in items.into_iter().enumerate() {
            self.emit(cells[i].clone(), Term::iri(vocab::RDF_FIRST), item);
            let rest = cells
                .get(i + 1)
                .cloned()
                .unwrap_or_else(|| Term::iri(vocab::RDF_NIL));
            self.emit(cells[i].clone(), Term::iri(vocab::RDF_REST), rest);
        }
        Ok(cells[0].clone())
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        let lexical = self.cursor.read_string(true)?;
        if self.cursor.eat('@') {
            let tag = self.cursor.read_langtag()?;
            return Ok(Term::Literal(Literal::new_lang(lexical, tag)));
        }
        if self.cursor.eat_str("^^") {
            let datatype = match self.cursor.peek() {
                Some('<') => self.cursor.read_iriref()?,
                _ => self.prefixed_name()?,
            };
            if datatype == vocab::RDF_LANG_STRING {
                return Err(self
                    .cursor
                    .error("rdf:langString literal without language tag"));
            }
            return Ok(Term::Literal(Literal::new_typed(lexical, datatype)));
        }
        Ok(Term::Literal(Literal::new_string(lexical)))
    }

    fn prefixed_name(&mut self) -> Result<String, ParseError> {
        let (line, column) = (self.cursor.line, self.cursor.column);
        let mut prefix = String::new();
        while let Some(c) = self.cursor.peek() {
            if c == ':' {
                break;
            }
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                prefix.push(c);
                self.cursor.next();
            } else {
                break;
            }
        }
        if self.cursor.peek() != Some(':') {
            return Err(ParseError::syntax(
                line,
                column,
                "expected IRI, prefixed name, or blank node",
            ));
        }
        self.cursor.next();
        let mut local = String::new();
        loop {
            match self.cursor.peek() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | ':') => {
                    local.push(c);
                    self.cursor.next();
                }
                Some('.')
                    if self.cursor.peek_nth(1).is_some_and(|n| {
                        n.is_alphanumeric() || matches!(n, '_' | '-' | ':' | '%')
                    }) =>
                {
                    local.push('.');
                    self.cursor.next();
                }
                Some('%') => {
                    local.push('%');
                    self.cursor.next();
                    for _ in 0..2 {
                        match self.cursor.next() {
                            Some(h) if h.is_ascii_hexdigit() => local.push(h),
                            _ => {
                                return Err(self
                                    .cursor
                                    .error("invalid percent escape in local name"))
                            }
                        }
                    }
                }
                Some('\\') => {
                    self.cursor.next();
                    match self.cursor.next() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(self.cursor.error("invalid escape in local name")),
                    }
                }
                _ => break,
            }
        }
        let Some(ns) = self.prefixes.get(&prefix) else {
            return Err(ParseError::UnknownPrefix { prefix, line });
        };
        Ok(format!("{ns}{local}"))
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term) {
        self.out
            .insert(Quad::new(subject, predicate, object, self.graph.clone()));
    }
}

/// Turtle-subset output grouped by subject, using the well-known prefixes
/// that the graph actually needs.
pub fn serialize_turtle(graph: &Graph) -> String {
    let prefixes = vocab::well_known_prefixes();
    let mut used = BTreeMap::new();
    let mut body = String::new();

    let mut by_subject: BTreeMap<String, (Term, Vec<(String, String)>)> = BTreeMap::new();
    for q in graph.iter() {
        let entry = by_subject
            .entry(q.subject.to_string())
            .or_insert_with(|| (q.subject.clone(), Vec::new()));
        let p = if q.predicate.as_iri() == Some(vocab::RDF_TYPE) {
            "a".to_string()
        } else {
            render_term(&q.predicate, &prefixes, &mut used)
        };
        let o = render_term(&q.object, &prefixes, &mut used);
        entry.1.push((p, o));
    }
    for (_, (subject, mut pairs)) in by_subject {
        pairs.sort();
        pairs.dedup();
        body.push_str(&render_term(&subject, &prefixes, &mut used));
        let mut last_predicate: Option<&str> = None;
        for (p, o) in &pairs {
            match last_predicate {
                None => {
                    let _ = write!(body, " {p} {o}");
                }
                Some(prev) if prev == p => {
                    let _ = write!(body, ", {o}");
                }
                Some(_) => {
                    let _ = write!(body, " ;\n    {p} {o}");
                }
            }
            last_predicate = Some(p);
        }
        body.push_str(" .\n");
    }

    let mut out = String::new();
    for (name, ns) in &used {
        let _ = writeln!(out, "@prefix {name}: <{ns}> .");
    }
    if !used.is_empty() && !body.is_empty() {
        out.push('\n');
    }
    out.push_str(&body);
    out
}

fn render_term(
    term: &Term,
    prefixes: &[(&'static str, &'static str)],
    used: &mut BTreeMap<&'static str, &'static str>,
) -> String {
    let mut s = String::new();
    match term {
        Term::Iri(iri) => s.push_str(&render_iri(iri, prefixes, used)),
        Term::BlankNode(label) => {
            let _ = write!(s, "_:{label}");
        }
        Term::Literal(lit) => {
            s.push('"');
            let _ = write_escaped_string(&mut s, lit.lexical());
            s.push('"');
            if let Some(lang) = lit.language() {
                let _ = write!(s, "@{lang}");
            } else if lit.datatype() != vocab::XSD_STRING {
                s.push_str("^^");
                s.push_str(&render_iri(lit.datatype(), prefixes, used));
            }
        }
    }
    s
}

fn render_iri(
    iri: &str,
    prefixes: &[(&'static str, &'static str)],
    used: &mut BTreeMap<&'static str, &'static str>,
) -> String {
    for (name, ns) in prefixes {
        if let Some(local) = iri.strip_prefix(ns) {
            if is_safe_local(local) {
                used.insert(name, ns);
                return format!("{name}:{local}");
            }
        }
    }
    let mut s = String::new();
    let _ = write_iri(&mut s, iri);
    s
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-'))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Term {
        Term::iri(vocab::DEFAULT_GRAPH)
    }

    #[test]
    fn a_keyword_expands_to_rdf_type() {
        let graph = parse_turtle_subset(
            "@prefix s: <http://schema.org/> . <http://ex/e1> a s:Event .",
            &g(),
        )
        .unwrap();
        assert_eq!(graph.len(), 1);
        let q = graph.iter().next().unwrap();
        assert_eq!(q.predicate, Term::iri(vocab::RDF_TYPE));
        assert_eq!(q.object, Term::iri("http://schema.org/Event"));
    }

    #[test]
    fn object_list() {
        let graph = parse_turtle_subset(
            "@prefix s: <http://schema.org/> .\n<http://ex/e1> s:name \"A\", \"B\" .",
            &g(),
        )
        .unwrap();
        assert_eq!(graph.len(), 2);
    }

    #[test]
    fn undeclared_prefix() {
        let err = parse_turtle_subset("<http://ex/e1> x:p \"A\" .", &g()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownPrefix {
                prefix: "x".into(),
                line: 1
            }
        );
    }

    #[test]
    fn nested_blank_nodes_and_collections() {
        let text = r#"
            @prefix sh: <http://www.w3.org/ns/shacl#> .
            PREFIX ex: <http://ex/>
            ex:S a sh:NodeShape ;
                sh:property [ sh:path ex:p ; sh:in ( "a" "b" ) ] ;
                ex:q _:x .
            _:x ex:r "1"^^<http://www.w3.org/2001/XMLSchema#integer> .
        "#;
        let graph = parse_turtle_subset(text, &g()).unwrap();
        // type, property, path, in, 2×(first,rest), q, r
        assert_eq!(graph.len(), 10);
        let labels: Vec<_> = graph
            .iter()
            .filter_map(|q| match &q.subject {
                Term::BlankNode(l) => Some(l.clone()),
                _ => None,
            })
            .collect();
        assert!(labels.iter().all(|l| l.starts_with('b')));
    }

    #[test]
    fn rejects_numeric_shorthand_and_base() {
        assert!(parse_turtle_subset("<http://ex/a> <http://ex/p> 5 .", &g()).is_err());
        assert!(parse_turtle_subset("<http://ex/a> <http://ex/p> true .", &g()).is_err());
        assert!(parse_turtle_subset("@base <http://ex/> .", &g()).is_err());
    }

    #[test]
    fn deterministic_labels() {
        let text = "<http://ex/a> <http://ex/p> [ <http://ex/q> [ <http://ex/r> \"x\" ] ] .";
        assert_eq!(
            parse_turtle_subset(text, &g()).unwrap(),
            parse_turtle_subset(text, &g()).unwrap()
        );
    }

    #[test]
    fn serializer_uses_prefixes_and_reparses() {
        let text = "@prefix schema: <http://schema.org/> .\n<http://ex/e1> a schema:Event ; schema:name \"Fest\"@de, \"x\\ny\" .";
        let graph = parse_turtle_subset(text, &g()).unwrap();
        let out = serialize_turtle(&graph);
        assert!(out.contains("@prefix schema: <http://schema.org/> ."));
        assert!(out.contains(" a schema:Event"));
        assert_eq!(parse_turtle_subset(&out, &g()).unwrap(), graph);
    }
}
