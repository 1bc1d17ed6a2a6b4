//! Quad store with one named graph per provider, instance-level upserts and
//! sorted N-Quads snapshots.
//!
//! An *instance* is an IRI subject together with its blank-node closure.
//! Upserts validate and replace whole instances; IRIs reachable from an
//! instance are separate instances and are never traversed.

mod index;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{self, nquads_line, parse_nquads, Format, Graph, ParseError, Quad, Term};
use crate::shacl::{self, Constraint, ShaclError, ShapeCatalog, ValidationReport, Violation};
use crate::vocab;

use index::Indexes;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown provider '{0}'")]
    UnknownProvider(String),
    #[error("invalid provider id '{0}': use letters, digits, '-' or '_'")]
    InvalidProviderId(String),
    #[error("graph {0} is neither a provider graph, the enrichment graph nor the default graph")]
    ForeignGraph(String),
    #[error("payload is not UTF-8")]
    Encoding,
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// What happens to an instance that no shape selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub enum UnshapedPolicy {
    #[default]
    RejectUnshaped,
    AdmitUnshaped,
}

#[derive(Debug, Clone)]
pub struct IngestBatch {
    pub provider_id: String,
    pub format: Format,
    pub payload: Vec<u8>,
    pub received_at: DateTime<Utc>,
}

impl IngestBatch {
    pub fn new(
        provider_id: impl Into<String>,
        format: Format,
        payload: impl Into<Vec<u8>>,
    ) -> IngestBatch {
        IngestBatch {
            provider_id: provider_id.into(),
            format,
            payload: payload.into(),
            received_at: Utc::now(),
        }
    }

    /// `<providerId>/<receivedAt>.<ext>` relative to a log directory.
    pub fn log_path(&self) -> PathBuf {
        let stamp = self.received_at.format("%Y-%m-%dT%H:%M:%S%.6fZ");
        PathBuf::from(&self.provider_id).join(format!("{stamp}.{}", self.format.extension()))
    }

    /// Appends the raw payload to the batch log rooted at `dir`.
    pub fn write_log(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join(self.log_path());
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, &self.payload)?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub instance: String,
    pub report: ValidationReport,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub accepted: Vec<String>,
    pub rejected: Vec<Rejection>,
    pub skipped_no_shape: Vec<String>,
    pub quads_written: usize,
    /// Operator-facing notes: cross-provider IRI collisions and blank
    /// nodes unreachable from any instance.
    pub warnings: Vec<String>,
}

/// Quads rooted at `root`: its own statements plus, recursively, those of
/// blank nodes it reaches.
pub fn instance_closure(root: &Term, g: &Graph) -> Graph {
    closure_with(root, |subject| g.with_subject(subject).cloned().collect())
}

fn closure_with(root: &Term, mut quads_of: impl FnMut(&Term) -> Vec<Quad>) -> Graph {
    let mut out = Graph::new();
    if root.is_literal() {
        return out;
    }
    let mut seen = BTreeSet::from([root.clone()]);
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(node) = queue.pop_front() {
        for q in quads_of(&node) {
            if q.object.is_blank() && seen.insert(q.object.clone()) {
                queue.push_back(q.object.clone());
            }
            out.insert(q);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Provider {
    graph: Term,
    policy: UnshapedPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    indexes: Indexes,
    providers: BTreeMap<String, Provider>,
    license_cache: BTreeMap<String, String>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Registers (or re-registers with a new policy) a provider and returns
    /// its graph IRI.
    pub fn register_provider(
        &mut self,
        id: &str,
        policy: UnshapedPolicy,
    ) -> Result<Term, StoreError> {
        let valid = !id.is_empty()
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid {
            return Err(StoreError::InvalidProviderId(id.to_string()));
        }
        let graph = Term::iri(vocab::provider_graph(id));
        self.providers.insert(
            id.to_string(),
            Provider {
                graph: graph.clone(),
                policy,
            },
        );
        Ok(graph)
    }

    pub fn provider_graph(&self, id: &str) -> Option<&Term> {
        self.providers.get(id).map(|p| &p.graph)
    }

    pub fn provider_policy(&self, id: &str) -> Option<UnshapedPolicy> {
        self.providers.get(id).map(|p| p.policy)
    }

    pub fn provider_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.providers.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.indexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Non-empty graphs with their quad counts.
    pub fn graph_sizes(&self) -> impl Iterator<Item = (&Term, usize)> + '_ {
        self.indexes.graphs()
    }

    fn check_graph(&self, graph: &Term) -> Result<(), StoreError> {
        let ok = match graph.as_iri() {
            Some(vocab::DEFAULT_GRAPH) | Some(vocab::ENRICHMENT_GRAPH) => true,
            Some(iri) => {
                vocab::provider_of_graph(iri).is_some_and(|id| self.providers.contains_key(id))
            }
            None => false,
        };
        if ok {
            Ok(())
        } else {
            Err(StoreError::ForeignGraph(graph.to_string()))
        }
    }

    pub fn insert(&mut self, quad: Quad) -> Result<bool, StoreError> {
        self.check_graph(&quad.graph)?;
        Ok(self.insert_unchecked(quad))
    }

    fn insert_unchecked(&mut self, quad: Quad) -> bool {
        if quad.predicate.as_iri() == Some(vocab::SCHEMA_LICENSE) {
            if let (Some(s), Some(o)) = (quad.subject.as_iri(), quad.object.as_iri()) {
                self.license_cache.insert(s.to_string(), o.to_string());
            }
        }
        self.indexes.insert(quad)
    }

    pub fn remove(&mut self, quad: &Quad) -> bool {
        let removed = self.indexes.remove(quad);
        if removed && quad.predicate.as_iri() == Some(vocab::SCHEMA_LICENSE) {
            if let Some(s) = quad.subject.as_iri() {
                self.refresh_license(s);
            }
        }
        removed
    }

    fn refresh_license(&mut self, iri: &str) {
        let subject = Term::iri(iri);
        let predicate = Term::iri(vocab::SCHEMA_LICENSE);
        let license = self
            .match_quads(Some(&subject), Some(&predicate), None, None)
            .find_map(|q| q.object.as_iri().map(str::to_string));
        match license {
            Some(l) => self.license_cache.insert(iri.to_string(), l),
            None => self.license_cache.remove(iri),
        };
    }

    /// License IRI recorded for an instance, if any.
    pub fn license(&self, iri: &str) -> Option<&str> {
        self.license_cache.get(iri).map(String::as_str)
    }

    /// Per type IRI, the number of distinct IRI subjects carrying it in any
    /// provider graph.
    pub fn type_counts(&self) -> BTreeMap<String, usize> {
        let rdf_type = Term::iri(vocab::RDF_TYPE);
        let mut typed: BTreeSet<(String, String)> = BTreeSet::new();
        for q in self.match_quads(None, Some(&rdf_type), None, None) {
            let in_provider = q
                .graph
                .as_iri()
                .and_then(vocab::provider_of_graph)
                .is_some();
            if let (true, Term::Iri(s), Term::Iri(t)) = (in_provider, q.subject, q.object) {
                typed.insert((t, s));
            }
        }
        let mut counts = BTreeMap::new();
        for (t, _) in typed {
            *counts.entry(t).or_insert(0) += 1;
        }
        counts
    }

    /// Quads matching all bound positions, in index order.
    pub fn match_quads<'a>(
        &'a self,
        s: Option<&'a Term>,
        p: Option<&'a Term>,
        o: Option<&'a Term>,
        g: Option<&'a Term>,
    ) -> impl Iterator<Item = Quad> + 'a {
        self.indexes.matching(s, p, o, g)
    }

    /// All quads in GSPO order.
    pub fn iter(&self) -> impl Iterator<Item = Quad> + '_ {
        self.indexes.scan()
    }

    pub fn dump(&self) -> Graph {
        self.iter().collect()
    }

    pub fn graph(&self, graph: &Term) -> Graph {
        self.match_quads(None, None, None, Some(graph)).collect()
    }

    /// Closure of `root` within one graph.
    pub fn closure_in(&self, root: &Term, graph: &Term) -> Graph {
        closure_with(root, |s| {
            self.match_quads(Some(s), None, None, Some(graph)).collect()
        })
    }

    /// Closure of `root` in every graph, including enrichment links whose
    /// subject is `root` and the link nodes they reach.
    pub fn describe(&self, root: &Term) -> Graph {
        closure_with(root, |s| {
            self.match_quads(Some(s), None, None, None).collect()
        })
    }

    /// Validates and stores the instances of one provider batch.
    pub fn upsert_instances(
        &mut self,
        batch: &IngestBatch,
        catalog: &ShapeCatalog,
        policy: UnshapedPolicy,
    ) -> Result<IngestReport, StoreError> {
        let graph = self
            .provider_graph(&batch.provider_id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownProvider(batch.provider_id.clone()))?;
        let text = std::str::from_utf8(&batch.payload).map_err(|_| StoreError::Encoding)?;
        let payload = rdf::parse(text, batch.format, &graph)?;

        let mut report = IngestReport::default();
        let roots: BTreeSet<&Term> = payload
            .subjects()
            .into_iter()
            .filter(|s| s.is_iri())
            .collect();
        let mut reached = BTreeSet::new();
        for root in &roots {
            let closure = relabel(&instance_closure(root, &payload), &batch.provider_id, root);
            for q in instance_closure(root, &payload).iter() {
                reached.insert(q.subject.clone());
            }
            let iri = root.as_iri().unwrap_or_default().to_string();
            self.note_collisions(&batch.provider_id, root, &mut report);

            let context = self.validation_context(&closure, &payload);
            let shapes = match shacl::resolve_shape(root, &context, catalog) {
                Ok(shapes) => shapes,
                Err(ShaclError::UnknownShapeReference { iri: shape }) => {
                    report.rejected.push(Rejection {
                        instance: iri,
                        report: ValidationReport::new(vec![Violation {
                            focus_node: (*root).clone(),
                            path: Some(vocab::SHAPE_REFERENCE.to_string()),
                            constraint: Constraint::ShapeReference,
                            message: format!("referenced shape <{shape}> is not loaded"),
                            value: Some(Term::iri(shape)),
                        }]),
                    });
                    continue;
                }
                Err(other) => {
                    report.rejected.push(Rejection {
                        instance: iri,
                        report: ValidationReport::new(vec![Violation {
                            focus_node: (*root).clone(),
                            path: None,
                            constraint: Constraint::ShapeReference,
                            message: other.to_string(),
                            value: None,
                        }]),
                    });
                    continue;
                }
            };
            if shapes.is_empty() && policy == UnshapedPolicy::RejectUnshaped {
                report.skipped_no_shape.push(iri);
                continue;
            }
            let validation = shacl::validate_all(root, &context, &shapes, catalog);
            if !validation.conforms() {
                report.rejected.push(Rejection {
                    instance: iri,
                    report: validation,
                });
                continue;
            }
            let old = self.closure_in(root, &graph);
            for q in old.iter() {
                self.remove(q);
            }
            report.quads_written += closure.len();
            for q in closure {
                self.insert_unchecked(q);
            }
            report.accepted.push(iri);
        }
        let orphans: BTreeSet<&Term> = payload
            .subjects()
            .into_iter()
            .filter(|s| s.is_blank() && !reached.contains(*s))
            .collect();
        if !orphans.is_empty() {
            report.warnings.push(format!(
                "{} blank node(s) not reachable from any IRI subject were ignored",
                orphans.len()
            ));
        }
        Ok(report)
    }

    fn note_collisions(&self, provider: &str, root: &Term, report: &mut IngestReport) {
        for (other, p) in &self.providers {
            if other == provider {
                continue;
            }
            if self
                .match_quads(Some(root), None, None, Some(&p.graph))
                .next()
                .is_some()
            {
                report.warnings.push(format!(
                    "instance {root} also exists in the graph of provider '{other}'; both copies are kept"
                ));
            }
        }
    }

    /// The closure plus the type statements of IRIs it points to, so that
    /// class constraints can see referenced instances.
    fn validation_context(&self, closure: &Graph, payload: &Graph) -> Graph {
        let mut out = closure.clone();
        let rdf_type = Term::iri(vocab::RDF_TYPE);
        let sub_class = Term::iri(vocab::RDFS_SUBCLASS_OF);
        let referenced: BTreeSet<&Term> = closure
            .iter()
            .map(|q| &q.object)
            .filter(|o| o.is_iri())
            .collect();
        for iri in referenced {
            out.extend(payload.objects(iri, vocab::RDF_TYPE).map(|t| {
                Quad::new(
                    iri.clone(),
                    rdf_type.clone(),
                    t.clone(),
                    Term::iri(vocab::DEFAULT_GRAPH),
                )
            }));
            out.extend(
                self.match_quads(Some(iri), Some(&rdf_type), None, None)
                    .map(|q| q.with_graph(&Term::iri(vocab::DEFAULT_GRAPH))),
            );
        }
        out.extend(payload.iter().filter(|q| q.predicate == sub_class).cloned());
        out
    }

    /// Deletes an instance closure from a provider graph together with
    /// enrichment quads that mention the instance. Returns quads removed.
    pub fn remove_instance(
        &mut self,
        provider_id: &str,
        instance: &str,
    ) -> Result<usize, StoreError> {
        let graph = self
            .provider_graph(provider_id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownProvider(provider_id.to_string()))?;
        let root = Term::iri(instance);
        let enrichment = Term::iri(vocab::ENRICHMENT_GRAPH);
        let mut doomed: Vec<Quad> = self.closure_in(&root, &graph).into_iter().collect();
        doomed.extend(self.match_quads(Some(&root), None, None, Some(&enrichment)));
        doomed.extend(self.match_quads(None, None, Some(&root), Some(&enrichment)));
        Ok(doomed.iter().filter(|q| self.remove(q)).count())
    }

    /// Writes a sorted N-Quads snapshot; returns the number of quads.
    pub fn snapshot(&self, path: &Path) -> Result<usize, StoreError> {
        let mut lines: Vec<String> = self.iter().map(|q| nquads_line(&q)).collect();
        lines.sort();
        let tmp = path.with_extension("nq.tmp");
        {
            let mut out = io::BufWriter::new(fs::File::create(&tmp)?);
            for line in &lines {
                out.write_all(line.as_bytes())?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(lines.len())
    }

    /// Loads a snapshot. Provider graphs found in the file are registered
    /// with the default policy.
    pub fn load_snapshot(path: &Path) -> Result<Store, StoreError> {
        let text = fs::read_to_string(path)?;
        let graph = parse_nquads(&text)?;
        let mut store = Store::new();
        let mut policies = HashMap::new();
        for q in graph.iter() {
            if let Some(id) = q.graph.as_iri().and_then(vocab::provider_of_graph) {
                policies
                    .entry(id.to_string())
                    .or_insert(UnshapedPolicy::default());
            }
        }
        for (id, policy) in policies {
            store.register_provider(&id, policy)?;
        }
        for q in graph {
            store.insert(q)?;
        }
        Ok(store)
    }
}

/// Replaces parser-assigned blank labels with labels derived from the
/// provider and instance, so that re-ingesting a batch reproduces the same
/// quads and instances from different batches never share blank nodes.
fn relabel(closure: &Graph, provider: &str, root: &Term) -> Graph {
    let digest = Sha256::digest(format!("{provider}\n{root}").as_bytes());
    let stem: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    let mut labels: HashMap<String, String> = HashMap::new();
    let mut order = Vec::new();
    // discovery order of a breadth-first walk is independent of parser labels
    let mut queue = VecDeque::from([root.clone()]);
    let mut seen = BTreeSet::from([root.clone()]);
    while let Some(node) = queue.pop_front() {
        let mut edges: Vec<&Quad> = closure.with_subject(&node).collect();
        edges.sort_by_key(|q| (q.predicate.clone(), shape_key(&q.object, closure)));
        for q in edges {
            if q.object.is_blank() && seen.insert(q.object.clone()) {
                order.push(q.object.clone());
                queue.push_back(q.object.clone());
            }
        }
    }
    for (i, node) in order.iter().enumerate() {
        if let Term::BlankNode(l) = node {
            labels.insert(l.clone(), format!("i{stem}x{i}"));
        }
    }
    let map = |t: &Term| match t {
        Term::BlankNode(l) => Term::BlankNode(labels.get(l).cloned().unwrap_or_else(|| l.clone())),
        other => other.clone(),
    };
    closure
        .iter()
        .map(|q| {
            Quad::new(
                map(&q.subject),
                q.predicate.clone(),
                map(&q.object),
                q.graph.clone(),
            )
        })
        .collect()
}

/// Label-free description of a node's outgoing ground statements, used to
/// order sibling blank nodes.
fn shape_key(node: &Term, g: &Graph) -> String {
    match node {
        Term::BlankNode(_) => {
            let mut parts: Vec<String> = g
                .with_subject(node)
                .map(|q| {
                    let o = if q.object.is_blank() {
                        "_".to_string()
                    } else {
                        q.object.to_string()
                    };
                    format!("{} {}", q.predicate, o)
                })
                .collect();
            parts.sort();
            format!("_[{}]", parts.join(";"))
        }
        other => other.to_string(),
    }
}
