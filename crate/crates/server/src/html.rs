//! HTML depiction of one instance for `/instance`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use tkg_core::{vocab, Graph, Term};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            other => out.push(other),
        }
    }
    out
}

struct Compactor<'a> {
    prefixes: &'a BTreeMap<String, String>,
}

impl Compactor<'_> {
    fn iri(&self, iri: &str) -> String {
        self.prefixes
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()) && iri.len() > ns.len())
            .max_by_key(|(_, ns)| ns.len())
            .map(|(p, ns)| format!("{p}:{}", &iri[ns.len()..]))
            .unwrap_or_else(|| iri.to_string())
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => format!("<a href=\"{}\">{}</a>", escape(iri), escape(&self.iri(iri))),
            Term::BlankNode(label) => format!("<span class=\"node\">_:{}</span>", escape(label)),
            Term::Literal(l) => {
                let mut out = format!("<span class=\"literal\">{}</span>", escape(l.lexical()));
                if let Some(lang) = l.language() {
                    let _ = write!(out, " <small>@{}</small>", escape(lang));
                } else if l.datatype() != vocab::XSD_STRING {
                    let _ = write!(out, " <small>{}</small>", escape(&self.iri(l.datatype())));
                }
                out
            }
        }
    }
}

fn instance_link(iri: &str, format: &str) -> String {
    format!(
        "/instance?uri={}&amp;format={format}",
        utf8_percent_encode(iri, NON_ALPHANUMERIC)
    )
}

/// Renders `described`, the result of describing `root`: name, types,
/// closure properties, geo-links with walking distances and license.
pub fn render_instance(
    root: &str,
    described: &Graph,
    license: Option<&str>,
    prefixes: &BTreeMap<String, String>,
) -> String {
    let c = Compactor { prefixes };
    let node = Term::iri(root);
    let enrichment = Term::iri(vocab::ENRICHMENT_GRAPH);
    let own: Vec<_> = described.iter().filter(|q| q.graph != enrichment).collect();
    let links: Vec<_> = described.iter().filter(|q| q.graph == enrichment).collect();

    let names: BTreeSet<&str> = own
        .iter()
        .filter(|q| q.subject == node && q.predicate.as_iri() == Some(vocab::SCHEMA_NAME))
        .filter_map(|q| q.object.as_literal().map(|l| l.lexical()))
        .collect();
    let types: BTreeSet<&str> = own
        .iter()
        .filter(|q| q.subject == node && q.predicate.as_iri() == Some(vocab::RDF_TYPE))
        .filter_map(|q| q.object.as_iri())
        .collect();
    let title = names.iter().next().copied().unwrap_or(root);

    let mut html = String::new();
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n</head>\n<body>\n<article class=\"instance\">\n<h1>{}</h1>\n<p class=\"iri\"><code>{}</code></p>\n",
        escape(title),
        escape(title),
        escape(root)
    );
    if names.len() > 1 {
        html.push_str("<p class=\"names\">");
        let all: Vec<String> = names.iter().map(|n| escape(n)).collect();
        html.push_str(&all.join(" · "));
        html.push_str("</p>\n");
    }

    html.push_str("<section class=\"types\">\n<h2>Types</h2>\n<ul>\n");
    for t in &types {
        let _ = writeln!(
            html,
            "<li><a href=\"{}\">{}</a></li>",
            escape(t),
            escape(&c.iri(t))
        );
    }
    html.push_str("</ul>\n</section>\n");

    html.push_str("<section class=\"properties\">\n<h2>Properties</h2>\n<table>\n<tr><th>Node</th><th>Property</th><th>Value</th></tr>\n");
    let mut queue = VecDeque::from([node.clone()]);
    let mut seen = BTreeSet::from([node.clone()]);
    while let Some(subject) = queue.pop_front() {
        let mut rows: Vec<_> = own.iter().filter(|q| q.subject == subject).collect();
        rows.sort_by(|a, b| (&a.predicate, &a.object).cmp(&(&b.predicate, &b.object)));
        for q in rows {
            let label = if subject == node {
                "".to_string()
            } else {
                c.term(&subject)
            };
            let _ = writeln!(
                html,
                "<tr><td>{label}</td><td>{}</td><td>{}</td></tr>",
                c.term(&q.predicate),
                c.term(&q.object)
            );
            if q.object.is_blank() && seen.insert(q.object.clone()) {
                queue.push_back(q.object.clone());
            }
        }
    }
    html.push_str("</table>\n</section>\n");

    let mut nearby: Vec<(String, String, String)> = Vec::new();
    for q in links
        .iter()
        .filter(|q| q.subject == node && q.predicate.as_iri() == Some(vocab::NEARBY))
    {
        let value = |p: &str| {
            links
                .iter()
                .find(|l| l.subject == q.object && l.predicate.as_iri() == Some(p))
                .map(|l| match &l.object {
                    Term::Literal(lit) => lit.lexical().to_string(),
                    other => other.as_iri().unwrap_or_default().to_string(),
                })
                .unwrap_or_default()
        };
        nearby.push((
            value(vocab::LINK_ENTITY),
            value(vocab::DISTANCE_METERS),
            value(vocab::WALKING_DISTANCE_METERS),
        ));
    }
    nearby.sort_by_key(|(entity, _, walking)| {
        (walking.parse::<u64>().unwrap_or(u64::MAX), entity.clone())
    });
    html.push_str("<section class=\"links\">\n<h2>Nearby</h2>\n");
    if nearby.is_empty() {
        html.push_str("<p>No linked entities.</p>\n");
    } else {
        html.push_str(
            "<table>\n<tr><th>Entity</th><th>Distance (m)</th><th>Walking distance (m)</th></tr>\n",
        );
        for (entity, distance, walking) in &nearby {
            let _ = writeln!(
                html,
                "<tr><td><a href=\"{}\">{}</a></td><td>{}</td><td>{}</td></tr>",
                escape(entity),
                escape(entity),
                escape(distance),
                escape(walking)
            );
        }
        html.push_str("</table>\n");
    }
    html.push_str("</section>\n");

    html.push_str("<section class=\"license\">\n<h2>License</h2>\n");
    match license {
        Some(l) => {
            let _ = writeln!(
                html,
                "<p><a href=\"{}\" rel=\"license\">{}</a></p>",
                escape(l),
                escape(l)
            );
        }
        None => html.push_str("<p>No license stated.</p>\n"),
    }
    html.push_str("</section>\n");

    let _ = write!(
        html,
        "<nav class=\"downloads\">\n<a href=\"{}\">N-Triples</a>\n<a href=\"{}\">Turtle</a>\n<a href=\"{}\">JSON-LD</a>\n</nav>\n</article>\n</body>\n</html>\n",
        instance_link(root, "ntriples"),
        instance_link(root, "turtle"),
        instance_link(root, "jsonld")
    );
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use tkg_core::Quad;

    fn prefixes() -> BTreeMap<String, String> {
        vocab::well_known_prefixes()
            .into_iter()
            .map(|(p, n)| (p.to_string(), n.to_string()))
            .collect()
    }

    #[test]
    fn renders_name_types_links_and_license() {
        let g = Term::iri(vocab::provider_graph("by"));
        let e = Term::iri(vocab::ENRICHMENT_GRAPH);
        let root = Term::iri("http://ex/poi/1");
        let link = Term::blank("l1");
        let mut graph = Graph::new();
        for q in [
            Quad::new(
                root.clone(),
                Term::iri(vocab::RDF_TYPE),
                Term::iri("https://odta.io/voc/PointOfInterest"),
                g.clone(),
            ),
            Quad::new(
                root.clone(),
                Term::iri(vocab::SCHEMA_NAME),
                Term::lang("Café <Zentral> & Bar", "de"),
                g.clone(),
            ),
            Quad::new(
                root.clone(),
                Term::iri(vocab::NEARBY),
                link.clone(),
                e.clone(),
            ),
            Quad::new(
                link.clone(),
                Term::iri(vocab::LINK_ENTITY),
                Term::iri("http://ex/station/9"),
                e.clone(),
            ),
            Quad::new(
                link.clone(),
                Term::iri(vocab::DISTANCE_METERS),
                Term::integer(100),
                e.clone(),
            ),
            Quad::new(
                link,
                Term::iri(vocab::WALKING_DISTANCE_METERS),
                Term::integer(130),
                e,
            ),
        ] {
            graph.insert(q);
        }
        let html = render_instance(
            "http://ex/poi/1",
            &graph,
            Some("https://creativecommons.org/licenses/by-sa/4.0/"),
            &prefixes(),
        );
        assert!(html.contains("<h1>Café &lt;Zentral&gt; &amp; Bar</h1>"));
        assert!(html.contains("odta:PointOfInterest"));
        assert!(html.contains("http://ex/station/9"));
        assert!(html.contains("<td>130</td>"));
        assert!(html.contains("https://creativecommons.org/licenses/by-sa/4.0/"));
        assert!(html.contains("format=turtle"));
        assert!(!html.contains("urn:tkg:nearby"));
    }

    #[test]
    fn falls_back_to_iri_title() {
        let html = render_instance("http://ex/x?a=1&b=2", &Graph::new(), None, &prefixes());
        assert!(html.contains("<h1>http://ex/x?a=1&amp;b=2</h1>"));
        assert!(html.contains("No license stated."));
        assert!(html.contains("uri=http%3A%2F%2Fex%2Fx%3Fa%3D1%26b%3D2"));
    }
}
