//! Core of the tourism knowledge graph pipeline.
//!
//! Providers deliver schema.org-style instances (directly as RDF or through
//! declarative feed mappings). Each instance is checked against the domain
//! specification shapes before it is admitted into the provider's named graph.
//! Points of interest are then geo-linked to nearby enrichment entities, and
//! the resulting graph is served through a small SPARQL subset.
//!
//! Module map:
//! - [`rdf`]: terms, quads, graphs, N-Triples / Turtle-subset / JSON-LD-profile I/O
//! - [`shacl`]: shape catalog loading and instance validation
//! - [`rml`]: JSON/CSV record mapping to RDF
//! - [`store`]: indexed quad store, instance upsert, snapshots
//! - [`sparql`]: query parser and evaluator
//! - [`geo`]: haversine distances, grid index, geo-linking

pub mod geo;
pub mod rdf;
pub mod rml;
pub mod shacl;
pub mod sparql;
pub mod store;
pub mod vocab;

pub use rdf::{Graph, Literal, Quad, Term};
