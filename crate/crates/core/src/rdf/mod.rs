//! RDF data model and the three interchange formats.

mod iso;
mod jsonld;
mod lexer;
mod ntriples;
mod term;
mod turtle;

pub use iso::is_isomorphic;
pub use jsonld::{parse_jsonld_profile, serialize_jsonld};
pub use ntriples::{nquads_line, parse_nquads, parse_ntriples, serialize_ntriples};
pub use term::{is_absolute_iri, is_valid_blank_label, Graph, Literal, Quad, Term};
pub use turtle::{parse_turtle_subset, serialize_turtle};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix '{prefix}' at line {line}")]
    UnknownPrefix { prefix: String, line: usize },
    #[error("unsupported JSON-LD feature: {feature}")]
    ProfileViolation { feature: String },
    #[error("cannot expand key '{key}' without a context")]
    MissingContext { key: String },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// Line/column of the failure, when the error is positional.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, column, .. } => Some((*line, *column)),
            ParseError::UnknownPrefix { line, .. } => Some((*line, 1)),
            _ => None,
        }
    }
}

/// Serialization formats accepted for ingestion and produced for download.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    NTriples,
    TurtleSubset,
    JsonLdProfile,
}

impl Format {
    pub fn media_type(self) -> &'static str {
        match self {
            Format::NTriples => "application/n-triples",
            Format::TurtleSubset => "text/turtle",
            Format::JsonLdProfile => "application/ld+json",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::NTriples => "nt",
            Format::TurtleSubset => "ttl",
            Format::JsonLdProfile => "jsonld",
        }
    }

    /// Resolves a media type (parameters ignored) to a format.
    pub fn from_media_type(media: &str) -> Option<Format> {
        let essence = media
            .split(';')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase();
        match essence.as_str() {
            "application/n-triples" | "text/plain" => Some(Format::NTriples),
            "text/turtle" | "application/x-turtle" => Some(Format::TurtleSubset),
            "application/ld+json" | "application/json" => Some(Format::JsonLdProfile),
            _ => None,
        }
    }

    /// Short names used on the command line and in `format=` query parameters.
    pub fn from_name(name: &str) -> Option<Format> {
        match name.to_ascii_lowercase().as_str() {
            "nt" | "ntriples" | "n-triples" => Some(Format::NTriples),
            "ttl" | "turtle" => Some(Format::TurtleSubset),
            "jsonld" | "json-ld" | "json" => Some(Format::JsonLdProfile),
            _ => None,
        }
    }

    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(Format::from_name)
    }
}

/// Parses `text` in `format`, tagging every statement with `graph`.
pub fn parse(text: &str, format: Format, graph: &Term) -> Result<Graph, ParseError> {
    match format {
        Format::NTriples => parse_ntriples(text, graph),
        Format::TurtleSubset => parse_turtle_subset(text, graph),
        Format::JsonLdProfile => parse_jsonld_profile(text, graph),
    }
}

/// Serializes the triples of `graph`; graph names are dropped.
pub fn serialize(graph: &Graph, format: Format) -> String {
    match format {
        Format::NTriples => serialize_ntriples(graph),
        Format::TurtleSubset => serialize_turtle(graph),
        Format::JsonLdProfile => serialize_jsonld(graph),
    }
}
