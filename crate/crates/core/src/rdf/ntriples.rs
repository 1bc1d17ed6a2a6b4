//! N-Triples and N-Quads (line-based, UTF-8).

use super::lexer::{normalize_blank_label, Cursor};
use super::term::{Graph, Literal, Quad, Term};
use super::ParseError;
use crate::vocab;

/// Parses an N-Triples document; all-or-nothing.
pub fn parse_ntriples(text: &str, graph: &Term) -> Result<Graph, ParseError> {
    parse_lines(text, Some(graph))
}

/// Parses an N-Quads document. Statements without a graph label land in
/// [`vocab::DEFAULT_GRAPH`].
pub fn parse_nquads(text: &str) -> Result<Graph, ParseError> {
    parse_lines(text, None)
}

fn parse_lines(text: &str, fixed_graph: Option<&Term>) -> Result<Graph, ParseError> {
    let mut cursor = Cursor::new(text);
    let mut out = Graph::new();
    let default_graph = Term::iri(vocab::DEFAULT_GRAPH);
    loop {
        cursor.skip_inline_ws();
        match cursor.peek() {
            None => break,
            Some('\n') | Some('\r') => {
                cursor.next();
                continue;
            }
            Some('#') => {
                skip_to_eol(&mut cursor);
                continue;
            }
            _ => {}
        }
        let subject = match cursor.peek() {
            Some('<') => Term::Iri(cursor.read_iriref()?),
            Some('_') => read_blank(&mut cursor)?,
            _ => return Err(cursor.error("expected subject IRI or blank node")),
        };
        cursor.skip_inline_ws();
        if cursor.peek() != Some('<') {
            return Err(cursor.error("expected predicate IRI"));
        }
        let predicate = Term::Iri(cursor.read_iriref()?);
        cursor.skip_inline_ws();
        let object = match cursor.peek() {
            Some('<') => Term::Iri(cursor.read_iriref()?),
            Some('_') => read_blank(&mut cursor)?,
            Some('"') => read_literal(&mut cursor)?,
            _ => return Err(cursor.error("expected object")),
        };
        cursor.skip_inline_ws();
        let graph = match fixed_graph {
            Some(g) => g.clone(),
            None if cursor.peek() == Some('<') => Term::Iri(cursor.read_iriref()?),
            None => default_graph.clone(),
        };
        cursor.skip_inline_ws();
        cursor.expect('.')?;
        cursor.skip_inline_ws();
        match cursor.peek() {
            None | Some('\n') | Some('\r') => {}
            Some('#') => skip_to_eol(&mut cursor),
            Some(c) => return Err(cursor.error(format!("unexpected '{c}' after statement"))),
        }
        out.insert(Quad::new(subject, predicate, object, graph));
    }
    Ok(out)
}

fn skip_to_eol(cursor: &mut Cursor<'_>) {
    while let Some(c) = cursor.peek() {
        if c == '\n' {
            break;
        }
        cursor.next();
    }
}

fn read_blank(cursor: &mut Cursor<'_>) -> Result<Term, ParseError> {
    if !cursor.eat_str("_:") {
        return Err(cursor.error("expected '_:'"));
    }
    let raw = cursor.read_blank_label()?;
    Ok(Term::BlankNode(normalize_blank_label(&raw)))
}

fn read_literal(cursor: &mut Cursor<'_>) -> Result<Term, ParseError> {
    let lexical = cursor.read_string(false)?;
    if cursor.eat('@') {
        let tag = cursor.read_langtag()?;
        Ok(Term::Literal(Literal::new_lang(lexical, tag)))
    } else if cursor.eat_str("^^") {
        let datatype = cursor.read_iriref()?;
        if datatype == vocab::RDF_LANG_STRING {
            return Err(cursor.error("rdf:langString literal without language tag"));
        }
        Ok(Term::Literal(Literal::new_typed(lexical, datatype)))
    } else {
        Ok(Term::Literal(Literal::new_string(lexical)))
    }
}

/// N-Triples, one statement per line, sorted by the (subject, predicate,
/// object) string forms.
pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut rows: Vec<(String, String, String)> = graph
        .iter()
        .map(|q| {
            (
                q.subject.to_string(),
                q.predicate.to_string(),
                q.object.to_string(),
            )
        })
        .collect();
    rows.sort();
    rows.dedup();
    let mut out = String::new();
    for (s, p, o) in rows {
        out.push_str(&s);
        out.push(' ');
        out.push_str(&p);
        out.push(' ');
        out.push_str(&o);
        out.push_str(" .\n");
    }
    out
}

/// One N-Quads line including the trailing newline.
pub fn nquads_line(quad: &Quad) -> String {
    format!(
        "{} {} {} {} .\n",
        quad.subject, quad.predicate, quad.object, quad.graph
    )
}
