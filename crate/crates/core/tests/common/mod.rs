#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use catalogql::catalog::load_catalog;
use catalogql::config::EngineConfig;
use catalogql::prom::{FixtureClient, FixtureSet};
use catalogql::service::Engine;

mod cases;
pub use cases::*;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn shipped_fixtures() -> FixtureSet {
    FixtureSet::from_dir(&manifest_dir().join("fixtures/prometheus")).unwrap()
}

/// Engine over the shipped catalog and Prometheus fixtures.
pub fn shipped_engine() -> (Engine, Arc<FixtureClient>) {
    let bytes = std::fs::read(manifest_dir().join("data/catalog.json")).unwrap();
    let catalog = load_catalog(&bytes).unwrap();
    let client = Arc::new(FixtureClient::from_set(shipped_fixtures()));
    let engine = Engine::new(catalog, EngineConfig::default(), Some(client.clone())).with_clock(|| NOW);
    (engine, client)
}
