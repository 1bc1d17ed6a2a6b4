//! HTTP API and command-line entry points over the tourism knowledge graph
//! core.
//!
//! - [`config`]: the JSON configuration file
//! - [`pipeline`]: store, shapes, datasets and search index behind one handle
//! - [`api`]: the axum router
//! - [`cli`]: `tkg` subcommands and exit codes
//! - [`search`]: name index behind `/search`
//! - [`html`]: instance pages behind `/instance`
//! - [`lock`]: the snapshot write lock

pub mod api;
pub mod cli;
pub mod config;
pub mod html;
pub mod lock;
pub mod pipeline;
pub mod search;
