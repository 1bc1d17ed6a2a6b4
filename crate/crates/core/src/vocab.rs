//! IRIs used across the pipeline.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_NON_NEGATIVE_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#nonNegativeInteger";
pub const XSD_ANY_URI: &str = "http://www.w3.org/2001/XMLSchema#anyURI";

pub const SH: &str = "http://www.w3.org/ns/shacl#";

pub const SCHEMA: &str = "http://schema.org/";
pub const SCHEMA_NAME: &str = "http://schema.org/name";
pub const SCHEMA_GEO: &str = "http://schema.org/geo";
pub const SCHEMA_LATITUDE: &str = "http://schema.org/latitude";
pub const SCHEMA_LONGITUDE: &str = "http://schema.org/longitude";
pub const SCHEMA_LICENSE: &str = "http://schema.org/license";

pub const ODTA: &str = "https://odta.io/voc/";

/// Graph holding statements that arrive without a provider.
pub const DEFAULT_GRAPH: &str = "urn:tkg:default";
/// Graph holding geo-linking output.
pub const ENRICHMENT_GRAPH: &str = "urn:tkg:enrichment";
/// Explicit shape reference from an instance to a catalog shape.
pub const SHAPE_REFERENCE: &str = "urn:tkg:shape";
pub const NEARBY: &str = "urn:tkg:nearby";
pub const LINK_ENTITY: &str = "urn:tkg:entity";
pub const DISTANCE_METERS: &str = "urn:tkg:distanceMeters";
pub const WALKING_DISTANCE_METERS: &str = "urn:tkg:walkingDistanceMeters";

const PROVIDER_GRAPH_PREFIX: &str = "urn:tkg:provider:";

/// Named graph IRI for a provider.
pub fn provider_graph(provider_id: &str) -> String {
    format!("{PROVIDER_GRAPH_PREFIX}{provider_id}")
}

/// Inverse of [`provider_graph`].
pub fn provider_of_graph(graph_iri: &str) -> Option<&str> {
    graph_iri.strip_prefix(PROVIDER_GRAPH_PREFIX)
}

/// Prefixes every serializer and query surface knows without declaration.
pub fn well_known_prefixes() -> Vec<(&'static str, &'static str)> {
    vec![
        ("rdf", RDF),
        ("rdfs", RDFS),
        ("xsd", XSD),
        ("sh", SH),
        ("schema", SCHEMA),
        ("odta", ODTA),
    ]
}
