//! Command line surface and engine construction.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use catalogql::catalog::synthetic::full_catalog;
use catalogql::catalog::{load_catalog, Catalog};
use catalogql::config::EngineConfig;
use catalogql::discovery::VendorPrefixConfig;
use catalogql::error::{CatalogError, ConfigError};
use catalogql::prom::{FixtureClient, FixtureSet, PromApi, PromError};
use catalogql::service::Engine;
use catalogql::temporal::{parse_duration, YesterdayMode};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::http::live_client;

#[derive(Debug, Parser)]
#[command(name = "catalogql", version, about = "Ask Prometheus questions in plain English")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    /// Defaults to the REPL.
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Prometheus (or Thanos) base URL.
    #[arg(long, env = "PROMETHEUS_URL", global = true)]
    pub prometheus_url: Option<String>,
    /// Bearer token sent to Prometheus.
    #[arg(long, env = "PROMETHEUS_TOKEN", hide_env_values = true, global = true)]
    pub prometheus_token: Option<String>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 10, global = true)]
    pub timeout: u64,
    /// Catalog JSON file. The built-in catalog is used otherwise.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Directory of recorded Prometheus responses to replay instead of a live server.
    #[arg(long, global = true, conflicts_with = "prometheus_url")]
    pub fixtures: Option<PathBuf>,
    /// Window used when a question names no time, e.g. `1h` or `30m`.
    #[arg(long, env = "DEFAULT_TIME_WINDOW", global = true)]
    pub default_window: Option<String>,
    /// Directory with override files (scoring.json, keyword_rules.json, ...).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Read "yesterday" as the previous calendar day instead of the last 24 hours.
    #[arg(long, global = true)]
    pub calendar_yesterday: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Answer one question.
    Ask {
        question: String,
        /// Time range overriding the question, e.g. `6h` or `last tuesday`.
        #[arg(long)]
        range: Option<String>,
        /// Run the query against Prometheus.
        #[arg(long)]
        execute: bool,
        /// Print the full answer as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Interactive session.
    Repl {
        #[arg(long)]
        execute: bool,
    },
    /// Serve JSON-RPC on /rpc plus /healthz and /readyz/gpu.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: String,
    },
}

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid default window `{0}` (expected e.g. 30m, 1h, 7d)")]
    Window(String),
    #[error(transparent)]
    Prom(#[from] PromError),
}

fn read(path: &Path) -> Result<Vec<u8>, SettingsError> {
    std::fs::read(path).map_err(|source| SettingsError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn engine_config(opts: &GlobalOpts) -> Result<EngineConfig, SettingsError> {
    let mut cfg = match &opts.config {
        Some(dir) => EngineConfig::from_dir(dir)?,
        None => EngineConfig::default(),
    };
    cfg.prefixes = VendorPrefixConfig::from_env();
    if let Some(w) = &opts.default_window {
        cfg.temporal.default_window = parse_duration(w).ok_or_else(|| SettingsError::Window(w.clone()))?;
    }
    if opts.calendar_yesterday {
        cfg.temporal.yesterday = YesterdayMode::Calendar;
    }
    Ok(cfg)
}

pub fn load(opts: &GlobalOpts, cfg: &EngineConfig) -> Result<Catalog, SettingsError> {
    let mut catalog = match &opts.catalog {
        Some(path) => load_catalog(&read(path)?)?,
        None => full_catalog(&cfg.keyword_rules),
    };
    if opts.config.is_some() {
        catalog.set_category_keywords(cfg.category_keywords.clone());
    }
    Ok(catalog)
}

pub fn prom_api(opts: &GlobalOpts) -> Result<Option<Arc<dyn PromApi>>, SettingsError> {
    if let Some(dir) = &opts.fixtures {
        let set = FixtureSet::from_dir(dir)?;
        log::info!("replaying {} fixtures from {}", set.len(), dir.display());
        return Ok(Some(Arc::new(FixtureClient::from_set(set))));
    }
    match &opts.prometheus_url {
        Some(url) => {
            let client = live_client(url, Duration::from_secs(opts.timeout.max(1)), opts.prometheus_token.clone())?;
            Ok(Some(Arc::new(client)))
        }
        None => Ok(None),
    }
}

pub fn build_engine(opts: &GlobalOpts) -> Result<Engine, SettingsError> {
    let cfg = engine_config(opts)?;
    let catalog = load(opts, &cfg)?;
    Ok(Engine::new(catalog, cfg, prom_api(opts)?))
}
