//! Configuration file shared by `tkg serve` and the pipeline commands.
//!
//! Relative paths are resolved against the directory holding the file.
//! `TKG_CONFIG` names the file when set, overriding `--config`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tkg_core::geo::EnrichmentConfig;
use tkg_core::store::UnshapedPolicy;

pub const CONFIG_ENV: &str = "TKG_CONFIG";
const MIN_KEY_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no config file given: pass --config or set {CONFIG_ENV}")]
    Missing,
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Consumer,
    Provider,
    Admin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ApiKey {
    pub key: String,
    pub role: Role,
    #[serde(default)]
    pub provider_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProviderEntry {
    pub id: String,
    #[serde(default)]
    pub unshaped_policy: UnshapedPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Jsonld,
}

/// An enrichment dataset file: CSV with header `iri,name,lat,lon`, or a
/// JSON-LD document of named, located nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: String,
    pub kind_iri: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<DatasetFormat>,
}

impl DatasetEntry {
    pub fn resolved_format(&self) -> Option<DatasetFormat> {
        self.format
            .or_else(|| match self.path.extension()?.to_str()? {
                "csv" => Some(DatasetFormat::Csv),
                "jsonld" | "json" => Some(DatasetFormat::Jsonld),
                _ => None,
            })
    }
}

/// Served to the search widget as `/widget/config.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WidgetConfig {
    #[serde(default = "default_api_base")]
    pub api_base_url: String,
    #[serde(default)]
    pub default_type_filters: Vec<String>,
}

impl Default for WidgetConfig {
    fn default() -> Self {
        WidgetConfig {
            api_base_url: default_api_base(),
            default_type_filters: Vec::new(),
        }
    }
}

fn default_api_base() -> String {
    "/".to_string()
}

fn default_listen() -> String {
    "127.0.0.1:8080".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_listen")]
    pub listen_address: String,
    #[serde(default)]
    pub api_keys: Vec<ApiKey>,
    pub providers: Vec<ProviderEntry>,
    pub shapes_dir: PathBuf,
    pub snapshot_path: PathBuf,
    #[serde(default)]
    pub prefixes: BTreeMap<String, String>,
    #[serde(default)]
    pub datasets: Vec<DatasetEntry>,
    /// Initial per-provider linking settings; `PUT /enrichment/config`
    /// overrides are kept next to the snapshot.
    #[serde(default)]
    pub enrichment: Vec<EnrichmentConfig>,
    #[serde(default)]
    pub widget_dir: Option<PathBuf>,
    #[serde(default)]
    pub widget: WidgetConfig,
    /// When set, raw ingestion payloads are logged under this directory.
    #[serde(default)]
    pub batch_log_dir: Option<PathBuf>,
}

/// The config path in effect: `TKG_CONFIG` if set, else the flag.
pub fn config_path(flag: Option<&Path>) -> Result<PathBuf, ConfigError> {
    match std::env::var_os(CONFIG_ENV) {
        Some(p) if !p.is_empty() => Ok(PathBuf::from(p)),
        _ => flag.map(Path::to_path_buf).ok_or(ConfigError::Missing),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Config = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.check()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.shapes_dir);
        join(&mut self.snapshot_path);
        for d in &mut self.datasets {
            join(&mut d.path);
        }
        if let Some(p) = &mut self.widget_dir {
            join(p);
        }
        if let Some(p) = &mut self.batch_log_dir {
            join(p);
        }
    }

    /// Cross-field checks: key lengths and roles, unique ids, and
    /// enrichment entries that name known providers and datasets.
    pub fn check(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        let mut providers = BTreeSet::new();
        for p in &self.providers {
            if !providers.insert(p.id.as_str()) {
                return fail(format!("provider '{}' listed twice", p.id));
            }
        }
        let mut keys = BTreeSet::new();
        for k in &self.api_keys {
            if k.key.chars().count() < MIN_KEY_LEN {
                return fail(format!(
                    "API keys must have at least {MIN_KEY_LEN} characters"
                ));
            }
            if !keys.insert(k.key.as_str()) {
                return fail("duplicate API key".to_string());
            }
            match (k.role, &k.provider_id) {
                (Role::Provider, Some(id)) if providers.contains(id.as_str()) => {}
                (Role::Provider, Some(id)) => {
                    return fail(format!("API key for unknown provider '{id}'"))
                }
                (Role::Provider, None) => {
                    return fail("provider API keys need a providerId".to_string())
                }
                (_, Some(_)) => {
                    return fail("only provider API keys carry a providerId".to_string())
                }
                (_, None) => {}
            }
        }
        let mut datasets = BTreeSet::new();
        for d in &self.datasets {
            if !datasets.insert(d.id.as_str()) {
                return fail(format!("dataset '{}' listed twice", d.id));
            }
            if d.resolved_format().is_none() {
                return fail(format!(
                    "dataset '{}': cannot tell CSV from JSON-LD; set \"format\"",
                    d.id
                ));
            }
        }
        let mut configured = BTreeSet::new();
        for e in &self.enrichment {
            if !providers.contains(e.provider_id.as_str()) {
                return fail(format!(
                    "enrichment for unknown provider '{}'",
                    e.provider_id
                ));
            }
            if !configured.insert(e.provider_id.as_str()) {
                return fail(format!(
                    "enrichment for provider '{}' listed twice",
                    e.provider_id
                ));
            }
            if let Some(id) = e
                .dataset_ids
                .iter()
                .find(|id| !datasets.contains(id.as_str()))
            {
                return fail(format!(
                    "enrichment for '{}' names unknown dataset '{id}'",
                    e.provider_id
                ));
            }
            if let Some(err) = e.validate().first() {
                return fail(format!(
                    "enrichment for '{}': {} {}",
                    e.provider_id, err.field, err.message
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<Config, ConfigError> {
        let mut config: Config = serde_json::from_str(json).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("inline"),
            message: e.to_string(),
        })?;
        config.resolve_paths(Path::new("/etc/tkg"));
        config.check()?;
        Ok(config)
    }

    const MINIMAL: &str = r#"{"providers": [{"id": "by"}], "shapesDir": "shapes", "snapshotPath": "/var/tkg/store.nq"}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.listen_address, "127.0.0.1:8080");
        assert_eq!(c.shapes_dir, PathBuf::from("/etc/tkg/shapes"));
        assert_eq!(c.snapshot_path, PathBuf::from("/var/tkg/store.nq"));
        assert_eq!(c.widget.api_base_url, "/");
        assert_eq!(
            c.providers[0].unshaped_policy,
            UnshapedPolicy::RejectUnshaped
        );
    }

    #[test]
    fn rejects_bad_keys() {
        let with_key = |key: &str| MINIMAL.replacen('{', &format!("{{\"apiKeys\": [{key}], "), 1);
        assert!(parse(&with_key(r#"{"key": "short", "role": "admin"}"#)).is_err());
        assert!(parse(&with_key(
            r#"{"key": "0123456789abcdef", "role": "provider"}"#
        ))
        .is_err());
        assert!(parse(&with_key(
            r#"{"key": "0123456789abcdef", "role": "provider", "providerId": "be"}"#
        ))
        .is_err());
        assert!(parse(&with_key(
            r#"{"key": "0123456789abcdef", "role": "consumer", "providerId": "by"}"#
        ))
        .is_err());
        assert!(parse(&with_key(
            r#"{"key": "0123456789abcdef", "role": "provider", "providerId": "by"}"#
        ))
        .is_ok());
    }

    #[test]
    fn rejects_enrichment_for_unknown_dataset() {
        let json = MINIMAL.replacen(
            '{',
            r#"{"enrichment": [{"providerId": "by", "datasetIds": ["nope"], "targetTypeIris": []}], "#,
            1,
        );
        let err = parse(&json).unwrap_err().to_string();
        assert!(err.contains("unknown dataset 'nope'"), "{err}");
    }

    #[test]
    fn dataset_format_from_extension() {
        let d = |path: &str| DatasetEntry {
            id: "d".into(),
            kind_iri: "http://ex/K".into(),
            path: PathBuf::from(path),
            format: None,
        };
        assert_eq!(d("a.csv").resolved_format(), Some(DatasetFormat::Csv));
        assert_eq!(d("a.jsonld").resolved_format(), Some(DatasetFormat::Jsonld));
        assert_eq!(d("a.txt").resolved_format(), None);
    }

    #[test]
    fn unknown_field_is_an_error() {
        assert!(matches!(
            parse(&MINIMAL.replacen('{', r#"{"listen": "x", "#, 1)),
            Err(ConfigError::Parse { .. })
        ));
    }
}
