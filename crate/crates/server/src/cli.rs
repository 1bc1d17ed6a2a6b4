//! `tkg` subcommands. Each returns an [`ExitStatus`]; machine-readable
//! results go to `out`, diagnostics to `err`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use tkg_core::rdf::{self, Format};
use tkg_core::rml::{execute_all, parse_mapping};
use tkg_core::shacl::{self, Constraint, ShaclError, ValidationReport, Violation};
use tkg_core::sparql::{results_to_csv, results_to_json};
use tkg_core::store::StoreError;
use tkg_core::{vocab, Term};

use crate::api::{router, AppState};
use crate::config::{config_path, Config};
use crate::lock::WriteLock;
use crate::pipeline::{load_shapes_dir, Pipeline, PipelineError, ShapesError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ValidationFailed = 1,
    InputError = 2,
    IoOrConfig = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            status: ExitStatus::InputError,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> CliError {
        CliError {
            status: ExitStatus::IoOrConfig,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> CliError {
        CliError::io(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::Store(StoreError::Syntax(_))
            | PipelineError::Store(StoreError::Encoding) => CliError::input(e.to_string()),
            PipelineError::InvalidEnrichment(ref errors) => {
                let detail: Vec<String> = errors
                    .iter()
                    .map(|f| format!("{}: {}", f.field, f.message))
                    .collect();
                CliError::io(format!("{e}: {}", detail.join("; ")))
            }
            other => CliError::io(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RdfFormat {
    #[value(alias = "nt")]
    Ntriples,
    #[value(alias = "ttl")]
    Turtle,
    #[value(alias = "json-ld")]
    Jsonld,
}

impl From<RdfFormat> for Format {
    fn from(f: RdfFormat) -> Format {
        match f {
            RdfFormat::Ntriples => Format::NTriples,
            RdfFormat::Turtle => Format::TurtleSubset,
            RdfFormat::Jsonld => Format::JsonLdProfile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResultFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "tkg",
    version,
    about = "Tourism knowledge graph pipeline and API server"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a data file against shapes; one JSON report line per instance.
    Validate {
        #[arg(long)]
        shapes: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        format: Option<RdfFormat>,
    },
    /// Apply a provider batch to the snapshot store.
    Ingest {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        provider: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        format: Option<RdfFormat>,
    },
    /// Recompute a provider's geo-links.
    Enrich {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        provider: String,
    },
    /// Run a SPARQL-subset query against the snapshot store.
    Query {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: ResultFormat,
    },
    /// Write the whole store as sorted N-Quads.
    Export {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a feed mapping over source files.
    Map {
        #[arg(long)]
        mapping: PathBuf,
        /// `<path>` for every source, or `<sourceId>=<path>`; repeatable.
        #[arg(long = "source", required = true)]
        sources: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs one command; the error message, if any, is written to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let result = match cli.command {
        Command::Serve { config } => serve(config.as_deref(), err),
        Command::Validate {
            shapes,
            data,
            format,
        } => validate(&shapes, &data, format.map(Format::from), out),
        Command::Ingest {
            config,
            provider,
            data,
            format,
        } => ingest(
            config.as_deref(),
            &provider,
            &data,
            format.map(Format::from),
            out,
            err,
        ),
        Command::Enrich { config, provider } => enrich(config.as_deref(), &provider, out, err),
        Command::Query {
            config,
            query,
            format,
        } => run_query(config.as_deref(), &query, format, out),
        Command::Export { config, out: path } => export(config.as_deref(), &path, err),
        Command::Map {
            mapping,
            sources,
            out: path,
        } => map(&mapping, &sources, &path, err),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.status
        }
    }
}

fn load_config(flag: Option<&Path>) -> Result<Config, CliError> {
    let path = config_path(flag).map_err(|e| CliError::io(e.to_string()))?;
    Config::load(&path).map_err(|e| CliError::io(e.to_string()))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn data_format(path: &Path, flag: Option<Format>) -> Result<Format, CliError> {
    flag.or_else(|| Format::from_path(path)).ok_or_else(|| {
        CliError::input(format!(
            "cannot infer the format of {}; pass --format",
            path.display()
        ))
    })
}

fn acquire(config: &Config) -> Result<WriteLock, CliError> {
    WriteLock::acquire(&config.snapshot_path).map_err(|e| CliError::io(e.to_string()))
}

fn serve(flag: Option<&Path>, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let config = load_config(flag)?;
    let _lock = acquire(&config)?;
    let pipeline = Pipeline::open(&config)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&config.listen_address)
            .await
            .map_err(|e| {
                CliError::io(format!("cannot listen on {}: {e}", config.listen_address))
            })?;
        let addr = listener.local_addr()?;
        let _ = writeln!(err, "tkg listening on http://{addr}");
        tracing::info!(%addr, "listening");
        let app = router(Arc::new(AppState::new(pipeline, &config, true)));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitStatus::Success)
    })
}

fn violation_report(
    root: &Term,
    constraint: Constraint,
    message: String,
    value: Option<Term>,
) -> ValidationReport {
    ValidationReport::new(vec![Violation {
        focus_node: root.clone(),
        path: Some(vocab::SHAPE_REFERENCE.to_string()),
        constraint,
        message,
        value,
    }])
}

fn validate(
    shapes: &Path,
    data: &Path,
    format: Option<Format>,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let catalog = load_shapes_dir(shapes).map_err(|e| match e {
        ShapesError::Io { .. } | ShapesError::Empty(_) => CliError::io(e.to_string()),
        other => CliError::input(other.to_string()),
    })?;
    let format = data_format(data, format)?;
    let bytes = read_file(data)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::input(format!("{} is not UTF-8", data.display())))?;
    let graph = rdf::parse(&text, format, &Term::iri(vocab::DEFAULT_GRAPH))
        .map_err(|e| CliError::input(format!("{}: {e}", data.display())))?;
    let mut status = ExitStatus::Success;
    for root in graph.subjects().into_iter().filter(|s| s.is_iri()) {
        let iri = root.as_iri().unwrap_or_default();
        let (shape_ids, report) = match shacl::resolve_shape(root, &graph, &catalog) {
            Ok(shapes) => {
                let ids: Vec<&str> = shapes.iter().map(|s| s.id.as_str()).collect();
                let report = (!shapes.is_empty())
                    .then(|| shacl::validate_all(root, &graph, &shapes, &catalog));
                (ids, report)
            }
            Err(ShaclError::UnknownShapeReference { iri: shape }) => (
                Vec::new(),
                Some(violation_report(
                    root,
                    Constraint::ShapeReference,
                    format!("referenced shape <{shape}> is not loaded"),
                    Some(Term::iri(shape)),
                )),
            ),
            Err(other) => (
                Vec::new(),
                Some(violation_report(
                    root,
                    Constraint::ShapeReference,
                    other.to_string(),
                    None,
                )),
            ),
        };
        let line = match &report {
            None => {
                json!({"instance": iri, "status": "noShape", "shapes": shape_ids, "violations": []})
            }
            Some(r) => {
                if !r.conforms() {
                    status = ExitStatus::ValidationFailed;
                }
                let state = if r.conforms() { "conforms" } else { "violates" };
                json!({"instance": iri, "status": state, "shapes": shape_ids, "violations": r.violations()})
            }
        };
        writeln!(out, "{line}")?;
    }
    Ok(status)
}

fn ingest(
    flag: Option<&Path>,
    provider: &str,
    data: &Path,
    format: Option<Format>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let config = load_config(flag)?;
    let format = data_format(data, format)?;
    let payload = read_file(data)?;
    let _lock = acquire(&config)?;
    let mut pipeline = Pipeline::open(&config)?;
    let (report, run) = pipeline.ingest(provider, format, payload)?;
    pipeline.save()?;
    writeln!(
        out,
        "{}",
        serde_json::to_string(&report).expect("report serializes")
    )?;
    let _ = writeln!(
        err,
        "{}: {} accepted, {} rejected, {} without shape",
        provider,
        report.accepted.len(),
        report.rejected.len(),
        report.skipped_no_shape.len()
    );
    if let Some(run) = run {
        let _ = writeln!(err, "{}: {}", provider, link_count(run.links));
    }
    Ok(if report.rejected.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::ValidationFailed
    })
}

fn link_count(n: usize) -> String {
    if n == 1 {
        "1 link".to_string()
    } else {
        format!("{n} links")
    }
}

fn enrich(
    flag: Option<&Path>,
    provider: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let config = load_config(flag)?;
    let _lock = acquire(&config)?;
    let mut pipeline = Pipeline::open(&config)?;
    let run = pipeline.enrich(provider)?;
    pipeline.save()?;
    writeln!(
        out,
        "{}",
        serde_json::to_string(&run).expect("run serializes")
    )?;
    let _ = writeln!(err, "{}", link_count(run.links));
    Ok(ExitStatus::Success)
}

fn run_query(
    flag: Option<&Path>,
    query: &Path,
    format: ResultFormat,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let config = load_config(flag)?;
    let text =
        String::from_utf8(read_file(query)?).map_err(|_| CliError::input("query is not UTF-8"))?;
    let pipeline = Pipeline::open(&config)?;
    let results = pipeline
        .query(&text)
        .map_err(|e| CliError::input(e.to_string()))?;
    match format {
        ResultFormat::Json => writeln!(out, "{}", results_to_json(&results))?,
        ResultFormat::Csv => write!(out, "{}", results_to_csv(&results))?,
    }
    Ok(ExitStatus::Success)
}

fn export(flag: Option<&Path>, path: &Path, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let config = load_config(flag)?;
    let pipeline = Pipeline::open(&config)?;
    let n = pipeline.export(path)?;
    let _ = writeln!(err, "wrote {n} quads to {}", path.display());
    Ok(ExitStatus::Success)
}

/// Binds each declared source id to a file: explicit `id=path` pairs
/// first, then the single bare path for every remaining id.
fn bind_sources(
    declared: &[String],
    args: &[String],
) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let mut bound = BTreeMap::new();
    let mut fallback: Option<PathBuf> = None;
    for arg in args {
        match arg.split_once('=') {
            Some((id, path)) if declared.iter().any(|d| d == id) => {
                bound.insert(id.to_string(), PathBuf::from(path));
            }
            _ if fallback.is_none() => fallback = Some(PathBuf::from(arg)),
            _ => {
                return Err(CliError::input(
                    "more than one --source without a source id",
                ))
            }
        }
    }
    for id in declared {
        if !bound.contains_key(id) {
            let path = fallback
                .clone()
                .ok_or_else(|| CliError::input(format!("no --source given for source '{id}'")))?;
            bound.insert(id.clone(), path);
        }
    }
    Ok(bound)
}

fn map(
    mapping: &Path,
    sources: &[String],
    out_path: &Path,
    err: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let doc = String::from_utf8(read_file(mapping)?)
        .map_err(|_| CliError::input("mapping is not UTF-8"))?;
    let maps = parse_mapping(&doc).map_err(|e| CliError::input(e.to_string()))?;
    let mut declared: Vec<String> = maps
        .iter()
        .map(|m| m.logical_source.source_id.clone())
        .collect();
    declared.sort();
    declared.dedup();
    let mut data = HashMap::new();
    for (id, path) in bind_sources(&declared, sources)? {
        data.insert(id, read_file(&path)?);
    }
    let output = execute_all(&maps, &data, &Term::iri(vocab::DEFAULT_GRAPH))
        .map_err(|e| CliError::input(e.to_string()))?;
    let format = Format::from_path(out_path).unwrap_or(Format::NTriples);
    fs::write(out_path, rdf::serialize(&output.graph, format))
        .map_err(|e| CliError::io(format!("{}: {e}", out_path.display())))?;
    for e in &output.errors {
        let _ = writeln!(err, "record {} of map {}: {}", e.record, e.map, e.message);
    }
    let _ = writeln!(
        err,
        "{} records, {} quads written, {} records skipped, {} quads skipped",
        output.records,
        output.graph.len(),
        output.skipped_records,
        output.skipped_quads
    );
    Ok(ExitStatus::Success)
}
