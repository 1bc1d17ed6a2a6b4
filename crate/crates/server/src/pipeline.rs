//! Store, shapes, enrichment datasets and search index behind one handle,
//! shared by the command-line tools and the HTTP API.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use tkg_core::geo::{
    self, build_index, EnrichmentConfig, EnrichmentDataset, EnrichmentRun, FieldError, GeoError,
    SpatialIndex,
};
use tkg_core::rdf::{self, Format, ParseError};
use tkg_core::shacl::{load_shapes, ShaclError, ShapeCatalog};
use tkg_core::sparql::{self, QueryError, QueryResults};
use tkg_core::store::{IngestBatch, IngestReport, Store, StoreError};
use tkg_core::{vocab, Graph, Term};

use crate::config::{Config, DatasetFormat};
use crate::search::{SearchHit, SearchIndex};

/// Grid cell size for enrichment indexes, in degrees.
const CELL_DEG: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ShapesError {
    #[error("cannot read shapes from {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Shape { path: PathBuf, source: ShaclError },
    #[error("no .ttl shape files in {0}")]
    Empty(PathBuf),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Shapes(#[from] ShapesError),
    #[error("dataset '{id}': {message}")]
    Dataset { id: String, message: String },
    #[error("unknown provider '{0}'")]
    UnknownProvider(String),
    #[error("invalid enrichment config")]
    InvalidEnrichment(Vec<FieldError>),
    #[error("snapshot {path}: {source}")]
    Snapshot { path: PathBuf, source: StoreError },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Loads every `*.ttl` file of `dir` into one catalog.
pub fn load_shapes_dir(dir: &Path) -> Result<ShapeCatalog, ShapesError> {
    let io_err = |source| ShapesError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ttl"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(ShapesError::Empty(dir.to_path_buf()));
    }
    let mut catalog = ShapeCatalog::default();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|source| ShapesError::Io {
            path: path.clone(),
            source,
        })?;
        let graph = rdf::parse(
            &text,
            Format::TurtleSubset,
            &Term::iri(vocab::DEFAULT_GRAPH),
        )
        .map_err(|source| ShapesError::Syntax {
            path: path.clone(),
            source,
        })?;
        let loaded = load_shapes(&graph).map_err(|source| ShapesError::Shape {
            path: path.clone(),
            source,
        })?;
        catalog.merge(loaded).map_err(|source| ShapesError::Shape {
            path: path.clone(),
            source,
        })?;
    }
    Ok(catalog)
}

/// Where `PUT /enrichment/config` overrides are kept.
pub fn enrichment_state_path(snapshot: &Path) -> PathBuf {
    let mut name = snapshot.file_name().unwrap_or_default().to_os_string();
    name.push(".enrichment.json");
    snapshot.with_file_name(name)
}

fn load_dataset(entry: &crate::config::DatasetEntry) -> Result<EnrichmentDataset, PipelineError> {
    let bytes = fs::read(&entry.path).map_err(|source| PipelineError::Io {
        path: entry.path.clone(),
        source,
    })?;
    let dataset = match entry.resolved_format() {
        Some(DatasetFormat::Csv) => EnrichmentDataset::from_csv(&entry.id, &entry.kind_iri, &bytes),
        _ => {
            let text = String::from_utf8(bytes).map_err(|_| PipelineError::Dataset {
                id: entry.id.clone(),
                message: "not UTF-8".into(),
            })?;
            EnrichmentDataset::from_jsonld(&entry.id, &entry.kind_iri, &text)
        }
    };
    dataset.map_err(|e| PipelineError::Dataset {
        id: entry.id.clone(),
        message: e.to_string(),
    })
}

pub struct Pipeline {
    store: Store,
    catalog: ShapeCatalog,
    indexes: BTreeMap<String, SpatialIndex>,
    configured: BTreeMap<String, EnrichmentConfig>,
    overrides: BTreeMap<String, EnrichmentConfig>,
    search: SearchIndex,
    prefixes: BTreeMap<String, String>,
    snapshot_path: PathBuf,
    batch_log_dir: Option<PathBuf>,
}

impl Pipeline {
    /// Loads shapes, datasets and the snapshot (when present) named by
    /// `config`, and registers the configured providers.
    pub fn open(config: &Config) -> Result<Pipeline, PipelineError> {
        let catalog = load_shapes_dir(&config.shapes_dir)?;
        let mut store = if config.snapshot_path.exists() {
            Store::load_snapshot(&config.snapshot_path).map_err(|source| {
                PipelineError::Snapshot {
                    path: config.snapshot_path.clone(),
                    source,
                }
            })?
        } else {
            Store::new()
        };
        for p in &config.providers {
            store.register_provider(&p.id, p.unshaped_policy)?;
        }
        let mut indexes = BTreeMap::new();
        for entry in &config.datasets {
            indexes.insert(
                entry.id.clone(),
                build_index(&load_dataset(entry)?, CELL_DEG),
            );
        }
        let configured = config
            .enrichment
            .iter()
            .map(|e| (e.provider_id.clone(), e.clone()))
            .collect();
        let state = enrichment_state_path(&config.snapshot_path);
        let overrides = if state.exists() {
            let text = fs::read_to_string(&state).map_err(|source| PipelineError::Io {
                path: state.clone(),
                source,
            })?;
            let list: Vec<EnrichmentConfig> =
                serde_json::from_str(&text).map_err(|e| PipelineError::Io {
                    path: state.clone(),
                    source: io::Error::new(io::ErrorKind::InvalidData, e),
                })?;
            list.into_iter()
                .map(|e| (e.provider_id.clone(), e))
                .collect()
        } else {
            BTreeMap::new()
        };
        let mut prefixes: BTreeMap<String, String> = vocab::well_known_prefixes()
            .into_iter()
            .map(|(p, n)| (p.to_string(), n.to_string()))
            .collect();
        prefixes.extend(config.prefixes.clone());
        let search = SearchIndex::build(&store);
        Ok(Pipeline {
            store,
            catalog,
            indexes,
            configured,
            overrides,
            search,
            prefixes,
            snapshot_path: config.snapshot_path.clone(),
            batch_log_dir: config.batch_log_dir.clone(),
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn catalog(&self) -> &ShapeCatalog {
        &self.catalog
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn has_provider(&self, id: &str) -> bool {
        self.store.provider_graph(id).is_some()
    }

    /// Validates and stores one batch, then refreshes the provider's
    /// geo-links when enrichment datasets are configured.
    pub fn ingest(
        &mut self,
        provider: &str,
        format: Format,
        payload: Vec<u8>,
    ) -> Result<(IngestReport, Option<EnrichmentRun>), PipelineError> {
        let policy = self
            .store
            .provider_policy(provider)
            .ok_or_else(|| PipelineError::UnknownProvider(provider.to_string()))?;
        let batch = IngestBatch::new(provider, format, payload);
        let report = self.store.upsert_instances(&batch, &self.catalog, policy)?;
        if let Some(dir) = &self.batch_log_dir {
            batch.write_log(dir).map_err(|source| PipelineError::Io {
                path: dir.clone(),
                source,
            })?;
        }
        let touched = report
            .accepted
            .iter()
            .chain(report.rejected.iter().map(|r| &r.instance))
            .cloned();
        self.search.refresh(&self.store, touched);
        let run = if self.indexes.is_empty() || report.accepted.is_empty() {
            None
        } else {
            Some(self.enrich(provider)?)
        };
        Ok((report, run))
    }

    /// Settings in effect for a provider: a stored override, else the
    /// config file entry, else defaults over every loaded dataset and the
    /// point-of-interest type.
    pub fn enrichment_config(&self, provider: &str) -> Result<EnrichmentConfig, PipelineError> {
        if !self.has_provider(provider) {
            return Err(PipelineError::UnknownProvider(provider.to_string()));
        }
        if let Some(c) = self
            .overrides
            .get(provider)
            .or_else(|| self.configured.get(provider))
        {
            return Ok(c.clone());
        }
        let ids: Vec<&str> = self.indexes.keys().map(String::as_str).collect();
        let poi = format!("{}PointOfInterest", vocab::ODTA);
        Ok(EnrichmentConfig::new(provider, &ids, &[poi.as_str()]))
    }

    /// Stores new settings for a provider and re-links its POIs.
    pub fn set_enrichment_config(
        &mut self,
        config: EnrichmentConfig,
    ) -> Result<EnrichmentRun, PipelineError> {
        if !self.has_provider(&config.provider_id) {
            return Err(PipelineError::UnknownProvider(config.provider_id.clone()));
        }
        let mut errors = config.validate();
        for id in config
            .dataset_ids
            .iter()
            .filter(|id| !self.indexes.contains_key(*id))
        {
            errors.push(FieldError {
                field: "datasetIds".into(),
                message: format!("unknown dataset '{id}'"),
            });
        }
        if !errors.is_empty() {
            return Err(PipelineError::InvalidEnrichment(errors));
        }
        let provider = config.provider_id.clone();
        self.overrides.insert(provider.clone(), config);
        self.enrich(&provider)
    }

    /// Recomputes and materializes the provider's geo-links.
    pub fn enrich(&mut self, provider: &str) -> Result<EnrichmentRun, PipelineError> {
        let config = self.enrichment_config(provider)?;
        Ok(geo::enrich_provider(
            &mut self.store,
            &config,
            &self.indexes,
        )?)
    }

    pub fn query(&self, text: &str) -> Result<QueryResults, QueryError> {
        sparql::evaluate(&self.store, &sparql::parse_query(text)?)
    }

    pub fn search(&self, query: &str, type_iri: Option<&str>, limit: usize) -> Vec<SearchHit> {
        self.search.search(query, type_iri, limit)
    }

    /// Expands `prefix:local`, `<iri>` or a bare absolute IRI.
    pub fn expand_iri(&self, text: &str) -> Result<String, String> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Ok(inner.to_string());
        }
        if text.contains("://") || text.starts_with("urn:") {
            return Ok(text.to_string());
        }
        let (prefix, local) = text
            .split_once(':')
            .ok_or_else(|| format!("'{text}' is neither an IRI nor a CURIE"))?;
        self.prefixes
            .get(prefix)
            .map(|ns| format!("{ns}{local}"))
            .ok_or_else(|| format!("unknown prefix '{prefix}'"))
    }

    /// True when `iri` is the subject of a quad in some provider graph.
    pub fn is_instance(&self, iri: &str) -> bool {
        let node = Term::iri(iri);
        let found = self
            .store
            .match_quads(Some(&node), None, None, None)
            .any(|q| {
                q.graph
                    .as_iri()
                    .and_then(vocab::provider_of_graph)
                    .is_some()
            });
        found
    }

    /// The instance closure across graphs, including its geo-links, or
    /// `None` when `iri` is not a stored instance.
    pub fn describe(&self, iri: &str) -> Option<Graph> {
        self.is_instance(iri)
            .then(|| self.store.describe(&Term::iri(iri)))
    }

    pub fn stats(&self) -> BTreeMap<String, usize> {
        self.store.type_counts()
    }

    /// Writes the snapshot and any stored enrichment overrides.
    pub fn save(&self) -> Result<usize, PipelineError> {
        if let Some(parent) = self.snapshot_path.parent() {
            fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let written =
            self.store
                .snapshot(&self.snapshot_path)
                .map_err(|source| PipelineError::Snapshot {
                    path: self.snapshot_path.clone(),
                    source,
                })?;
        if !self.overrides.is_empty() {
            let state = enrichment_state_path(&self.snapshot_path);
            let list: Vec<&EnrichmentConfig> = self.overrides.values().collect();
            let text = serde_json::to_string_pretty(&list).expect("configs serialize");
            fs::write(&state, text).map_err(|source| PipelineError::Io {
                path: state,
                source,
            })?;
        }
        Ok(written)
    }

    /// Sorted N-Quads of every graph.
    pub fn export(&self, path: &Path) -> Result<usize, PipelineError> {
        self.store
            .snapshot(path)
            .map_err(|source| PipelineError::Snapshot {
                path: path.to_path_buf(),
                source,
            })
    }

    /// Instance roots per provider graph, for diagnostics.
    pub fn instances(&self) -> BTreeSet<String> {
        self.store
            .iter()
            .filter(|q| {
                q.graph
                    .as_iri()
                    .and_then(vocab::provider_of_graph)
                    .is_some()
            })
            .filter_map(|q| q.subject.as_iri().map(str::to_string))
            .collect()
    }
}
