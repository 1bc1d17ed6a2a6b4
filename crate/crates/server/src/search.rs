//! In-memory name index for `/search`.
//!
//! Each instance root (an IRI subject in a provider graph) is indexed by
//! its `schema:name` literals. A trigram table narrows candidates for
//! queries of three or more characters; the final match is always a
//! case-insensitive substring test.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use tkg_core::store::Store;
use tkg_core::{vocab, Term};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchHit {
    pub instance: String,
    pub name: String,
    pub type_iris: Vec<String>,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub license: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum MatchKind {
    Substring = 1,
    Prefix = 2,
    Exact = 3,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Doc {
    /// `(original, lowercased)` pairs.
    names: Vec<(String, String)>,
    types: BTreeSet<String>,
    license: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct SearchIndex {
    docs: BTreeMap<String, Doc>,
    grams: HashMap<String, BTreeSet<String>>,
}

fn trigrams(text: &str) -> BTreeSet<String> {
    let chars: Vec<char> = text.chars().collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

fn in_provider_graph(graph: &Term) -> bool {
    graph.as_iri().and_then(vocab::provider_of_graph).is_some()
}

impl SearchIndex {
    pub fn build(store: &Store) -> SearchIndex {
        let roots: BTreeSet<String> = store
            .iter()
            .filter(|q| in_provider_graph(&q.graph))
            .filter_map(|q| q.subject.as_iri().map(str::to_string))
            .collect();
        let mut index = SearchIndex::default();
        index.refresh(store, roots);
        index
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Re-reads the given instances from the store; instances that are no
    /// longer stored are dropped.
    pub fn refresh(&mut self, store: &Store, instances: impl IntoIterator<Item = String>) {
        for iri in instances {
            self.remove(&iri);
            let node = Term::iri(iri.as_str());
            let mut doc = Doc::default();
            let mut present = false;
            for q in store.match_quads(Some(&node), None, None, None) {
                if !in_provider_graph(&q.graph) {
                    continue;
                }
                present = true;
                match (q.predicate.as_iri(), &q.object) {
                    (Some(vocab::SCHEMA_NAME), Term::Literal(l)) => {
                        let pair = (l.lexical().to_string(), l.lexical().to_lowercase());
                        if !doc.names.contains(&pair) {
                            doc.names.push(pair);
                        }
                    }
                    (Some(vocab::RDF_TYPE), Term::Iri(t)) => {
                        doc.types.insert(t.clone());
                    }
                    _ => {}
                }
            }
            if !present {
                continue;
            }
            doc.names.sort();
            doc.license = store.license(&iri).map(str::to_string);
            for (_, lower) in &doc.names {
                for g in trigrams(lower) {
                    self.grams.entry(g).or_default().insert(iri.clone());
                }
            }
            self.docs.insert(iri, doc);
        }
    }

    fn remove(&mut self, iri: &str) {
        if let Some(doc) = self.docs.remove(iri) {
            for (_, lower) in &doc.names {
                for g in trigrams(lower) {
                    if let Some(set) = self.grams.get_mut(&g) {
                        set.remove(iri);
                        if set.is_empty() {
                            self.grams.remove(&g);
                        }
                    }
                }
            }
        }
    }

    fn candidates(&self, needle: &str) -> Vec<&String> {
        let grams = trigrams(needle);
        if grams.is_empty() {
            return self.docs.keys().collect();
        }
        let mut sets: Vec<&BTreeSet<String>> = Vec::new();
        for g in &grams {
            match self.grams.get(g) {
                Some(set) => sets.push(set),
                None => return Vec::new(),
            }
        }
        sets.sort_by_key(|s| s.len());
        sets[0]
            .iter()
            .filter(|iri| sets[1..].iter().all(|s| s.contains(*iri)))
            .collect()
    }

    /// Ranked hits for `query`: exact name match, then prefix, then
    /// substring; ties by shorter name, then IRI. `type_iri` keeps only
    /// instances carrying that type.
    pub fn search(&self, query: &str, type_iri: Option<&str>, limit: usize) -> Vec<SearchHit> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        let mut scored: Vec<(MatchKind, usize, &String, &String, &Doc)> = Vec::new();
        for iri in self.candidates(&needle) {
            let doc = &self.docs[iri];
            if type_iri.is_some_and(|t| !doc.types.contains(t)) {
                continue;
            }
            let best = doc
                .names
                .iter()
                .filter_map(|(name, lower)| {
                    let kind = if *lower == needle {
                        MatchKind::Exact
                    } else if lower.starts_with(&needle) {
                        MatchKind::Prefix
                    } else if lower.contains(&needle) {
                        MatchKind::Substring
                    } else {
                        return None;
                    };
                    Some((kind, name.chars().count(), name))
                })
                .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
            if let Some((kind, len, name)) = best {
                scored.push((kind, len, iri, name, doc));
            }
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
        scored
            .into_iter()
            .take(limit)
            .map(|(kind, _, iri, name, doc)| SearchHit {
                instance: iri.clone(),
                name: name.clone(),
                type_iris: doc.types.iter().cloned().collect(),
                score: kind as u8 as f64,
                license: doc.license.clone(),
            })
            .collect()
    }
}
