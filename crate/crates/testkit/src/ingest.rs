//! Synthetic daily deliveries for sixteen providers, with a known set of
//! deliberately broken instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use tkg_core::rdf::{serialize, Format};
use tkg_core::{vocab, Graph, Quad, Term};

pub const PROVIDERS: &[&str] = &[
    "bw", "by", "be", "bb", "hb", "hh", "he", "mv", "ni", "nw", "rp", "sl", "sn", "st", "sh", "th",
];

const SCHEMA: &str = "http://schema.org/";
const ODTA: &str = "https://odta.io/voc/";
const LICENSE: &str = "https://creativecommons.org/licenses/by-sa/4.0/";

#[derive(Debug, Clone)]
pub struct SyntheticBatch {
    pub provider: String,
    pub format: Format,
    pub payload: String,
    pub valid: BTreeSet<String>,
    /// Broken instance IRI to the constraint its defect violates.
    pub invalid: BTreeMap<String, &'static str>,
}

impl SyntheticBatch {
    pub fn instances(&self) -> usize {
        self.valid.len() + self.invalid.len()
    }
}

struct Builder {
    graph: Graph,
    g: Term,
    blank: usize,
    prefix: String,
}

impl Builder {
    fn add(&mut self, s: &Term, p: &str, o: Term) {
        self.graph
            .insert(Quad::new(s.clone(), Term::iri(p), o, self.g.clone()));
    }

    fn fresh(&mut self) -> Term {
        self.blank += 1;
        Term::blank(format!("{}{}", self.prefix, self.blank))
    }

    fn geo(&mut self, s: &Term, rng: &mut StdRng) {
        let node = self.fresh();
        self.add(s, &format!("{SCHEMA}geo"), node.clone());
        let lat = format!("{:.6}", rng.gen_range(47.3..54.9));
        let lon = format!("{:.6}", rng.gen_range(6.0..15.0));
        self.add(
            &node,
            &format!("{SCHEMA}latitude"),
            Term::typed(lat, vocab::XSD_DOUBLE),
        );
        self.add(
            &node,
            &format!("{SCHEMA}longitude"),
            Term::typed(lon, vocab::XSD_DOUBLE),
        );
    }

    fn address(&mut self, s: &Term, rng: &mut StdRng, postal: Option<&str>) {
        let node = self.fresh();
        self.add(s, &format!("{SCHEMA}address"), node.clone());
        let code = postal
            .map(str::to_string)
            .unwrap_or_else(|| format!("{:05}", rng.gen_range(1000..99999)));
        self.add(&node, &format!("{SCHEMA}postalCode"), Term::string(code));
        let town = *["Erfurt", "Kiel", "Passau", "Görlitz", "Trier"]
            .choose(rng)
            .expect("non-empty");
        self.add(
            &node,
            &format!("{SCHEMA}addressLocality"),
            Term::string(town),
        );
        self.add(
            &node,
            &format!("{SCHEMA}addressCountry"),
            Term::string("DE"),
        );
    }
}

const DEFECTS: &[(&str, &str)] = &[
    ("no-name", "minCount"),
    ("event-date", "datatype"),
    ("trail-difficulty", "in"),
    ("license-literal", "nodeKind"),
    ("trail-extra", "closed"),
    ("postal-code", "pattern"),
    ("rooms-decimal", "datatype"),
    ("price-range", "pattern"),
    ("place-untyped", "class"),
    ("two-geo", "maxCount"),
];

/// Types and the defects applicable to them.
fn kinds() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("Event", vec!["no-name", "event-date", "license-literal"]),
        (
            "PointOfInterest",
            vec!["no-name", "two-geo", "license-literal"],
        ),
        ("Trail", vec!["trail-difficulty", "trail-extra", "no-name"]),
        ("LodgingBusiness", vec!["rooms-decimal", "postal-code"]),
        ("LocalBusiness", vec!["place-untyped", "no-name"]),
        ("FoodEstablishment", vec!["price-range", "postal-code"]),
    ]
}

fn type_iri(kind: &str) -> String {
    match kind {
        "PointOfInterest" | "Trail" => format!("{ODTA}{kind}"),
        _ => format!("{SCHEMA}{kind}"),
    }
}

/// One batch per provider with about `per_provider` instances, of which
/// roughly `invalid_rate` carry exactly one defect.
pub fn synthetic_batches(
    rng: &mut StdRng,
    per_provider: usize,
    invalid_rate: f64,
) -> Vec<SyntheticBatch> {
    let formats = [
        Format::TurtleSubset,
        Format::NTriples,
        Format::JsonLdProfile,
    ];
    PROVIDERS
        .iter()
        .enumerate()
        .map(|(pi, provider)| {
            let mut b = Builder {
                graph: Graph::new(),
                g: Term::iri(vocab::DEFAULT_GRAPH),
                blank: 0,
                prefix: "n".into(),
            };
            let mut valid = BTreeSet::new();
            let mut invalid = BTreeMap::new();
            let kinds = kinds();
            for i in 0..per_provider {
                let (kind, defects) = &kinds[i % kinds.len()];
                let iri = format!(
                    "https://data.{provider}.example/{}/{i}",
                    kind.to_lowercase()
                );
                let defect = rng
                    .gen_bool(invalid_rate)
                    .then(|| *defects.choose(rng).expect("non-empty"));
                instance(&mut b, rng, kind, &iri, defect);
                match defect {
                    Some(d) => {
                        let constraint = DEFECTS
                            .iter()
                            .find(|(n, _)| *n == d)
                            .expect("known defect")
                            .1;
                        invalid.insert(iri, constraint);
                    }
                    None => {
                        valid.insert(iri);
                    }
                }
            }
            let format = formats[pi % formats.len()];
            SyntheticBatch {
                provider: provider.to_string(),
                format,
                payload: serialize(&b.graph, format),
                valid,
                invalid,
            }
        })
        .collect()
}

fn instance(b: &mut Builder, rng: &mut StdRng, kind: &str, iri: &str, defect: Option<&str>) {
    let s = Term::iri(iri);
    let has = |d: &str| defect == Some(d);
    b.add(&s, vocab::RDF_TYPE, Term::iri(type_iri(kind)));
    if !has("no-name") {
        let name = format!("{} {}", kind, rng.gen_range(0..10_000));
        b.add(&s, vocab::SCHEMA_NAME, Term::lang(name, "de"));
    }
    if has("license-literal") {
        b.add(&s, vocab::SCHEMA_LICENSE, Term::string("CC BY-SA 4.0"));
    } else if rng.gen_bool(0.8) {
        b.add(&s, vocab::SCHEMA_LICENSE, Term::iri(LICENSE));
    }
    match kind {
        "Event" => {
            let day = rng.gen_range(1..=28);
            let start = if has("event-date") {
                Term::typed(format!("2024-07-{day:02}"), vocab::XSD_DATE)
            } else {
                Term::typed(format!("2024-07-{day:02}T18:00:00"), vocab::XSD_DATE_TIME)
            };
            b.add(&s, &format!("{SCHEMA}startDate"), start);
            let place = b.fresh();
            b.add(&s, &format!("{SCHEMA}location"), place.clone());
            b.add(&place, vocab::SCHEMA_NAME, Term::string("Marktplatz"));
        }
        "PointOfInterest" => {
            b.geo(&s, rng);
            if has("two-geo") {
                b.geo(&s, rng);
            }
            if rng.gen_bool(0.5) {
                b.address(&s, rng, None);
            }
        }
        "Trail" => {
            b.geo(&s, rng);
            let level = if has("trail-difficulty") {
                "extreme"
            } else {
                *["easy", "medium", "difficult"]
                    .choose(rng)
                    .expect("non-empty")
            };
            b.add(&s, &format!("{ODTA}difficulty"), Term::string(level));
            b.add(
                &s,
                &format!("{SCHEMA}duration"),
                Term::string(format!("PT{}H", rng.gen_range(1..9))),
            );
            if has("trail-extra") {
                b.add(&s, &format!("{SCHEMA}keywords"), Term::string("river"));
            }
        }
        "LodgingBusiness" => {
            b.address(&s, rng, has("postal-code").then_some("12"));
            let rooms = if has("rooms-decimal") {
                Term::typed("12.5", vocab::XSD_DECIMAL)
            } else {
                Term::integer(rng.gen_range(3..400))
            };
            b.add(&s, &format!("{SCHEMA}numberOfRooms"), rooms);
        }
        "LocalBusiness" => {
            let place = Term::iri(format!("{iri}/place"));
            b.add(&s, &format!("{SCHEMA}containedInPlace"), place.clone());
            if !has("place-untyped") {
                b.add(&place, vocab::RDF_TYPE, Term::iri(format!("{SCHEMA}Place")));
                b.add(&place, vocab::SCHEMA_NAME, Term::string("Altstadt"));
            }
        }
        "FoodEstablishment" => {
            b.address(&s, rng, has("postal-code").then_some("12"));
            b.add(
                &s,
                &format!("{SCHEMA}servesCuisine"),
                Term::string("regional"),
            );
            let price = if has("price-range") {
                "€€€€€"
            } else {
                "€€"
            };
            b.add(&s, &format!("{SCHEMA}priceRange"), Term::string(price));
        }
        _ => unreachable!("unknown kind"),
    }
}
