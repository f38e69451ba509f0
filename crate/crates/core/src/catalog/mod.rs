//! Category-indexed metric catalog with a flat name lookup.
//!
//! Entries are stored per category, sorted by name, so two catalogs holding
//! the same metrics compare equal regardless of the order they were built in.

mod keywords;
pub mod naming;
pub mod synthetic;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{byte_offset, CatalogError};

pub use keywords::{generate_keywords, generate_keywords_with, KeywordRules, Tiers, MAX_KEYWORDS};

/// The registered category taxonomy. Variants are declared in lexicographic
/// order of their ids so the derived `Ord` matches string ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ApiServer,
    Autoscaling,
    ClusterHealth,
    ControllerManager,
    Dns,
    Etcd,
    GpuAi,
    Ingress,
    Kubelet,
    Networking,
    NodeHardware,
    Observability,
    PodContainer,
    Runtime,
    Scheduler,
    Security,
    Storage,
}

impl Category {
    pub const ALL: [Category; 17] = [
        Category::ApiServer,
        Category::Autoscaling,
        Category::ClusterHealth,
        Category::ControllerManager,
        Category::Dns,
        Category::Etcd,
        Category::GpuAi,
        Category::Ingress,
        Category::Kubelet,
        Category::Networking,
        Category::NodeHardware,
        Category::Observability,
        Category::PodContainer,
        Category::Runtime,
        Category::Scheduler,
        Category::Security,
        Category::Storage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ApiServer => "api_server",
            Category::Autoscaling => "autoscaling",
            Category::ClusterHealth => "cluster_health",
            Category::ControllerManager => "controller_manager",
            Category::Dns => "dns",
            Category::Etcd => "etcd",
            Category::GpuAi => "gpu_ai",
            Category::Ingress => "ingress",
            Category::Kubelet => "kubelet",
            Category::Networking => "networking",
            Category::NodeHardware => "node_hardware",
            Category::Observability => "observability",
            Category::PodContainer => "pod_container",
            Category::Runtime => "runtime",
            Category::Scheduler => "scheduler",
            Category::Security => "security",
            Category::Storage => "storage",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CatalogError::UnknownCategory(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricType {
    Counter,
    Gauge,
    Histogram,
    Summary,
}

impl MetricType {
    pub const ALL: [MetricType; 4] = [
        MetricType::Counter,
        MetricType::Gauge,
        MetricType::Histogram,
        MetricType::Summary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricType::Counter => "counter",
            MetricType::Gauge => "gauge",
            MetricType::Histogram => "histogram",
            MetricType::Summary => "summary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        MetricType::ALL.iter().copied().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for MetricType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Operational priority. `High` orders before `Medium`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Priority {
    High,
    Medium,
}

impl Priority {
    pub fn as_str(self) -> &'static str {
        match self {
            Priority::High => "High",
            Priority::Medium => "Medium",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "High" => Some(Priority::High),
            "Medium" => Some(Priority::Medium),
            _ => None,
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub name: String,
    #[serde(rename = "type")]
    pub metric_type: MetricType,
    pub help: String,
    pub priority: Priority,
    pub keywords: Vec<String>,
    pub category: Category,
}

/// Returns true if `name` only uses characters legal in a Prometheus metric name.
pub fn is_valid_metric_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == ':' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ':')
}

#[derive(Deserialize)]
struct WireCatalog {
    #[serde(default)]
    version: String,
    categories: BTreeMap<String, Vec<WireEntry>>,
}

#[derive(Serialize, Deserialize)]
struct WireEntry {
    name: String,
    #[serde(rename = "type")]
    metric_type: String,
    #[serde(default)]
    help: String,
    priority: String,
    #[serde(default)]
    keywords: Vec<String>,
}

#[derive(Serialize)]
struct WireCatalogOut<'a> {
    version: &'a str,
    categories: BTreeMap<&'static str, Vec<WireEntry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CatalogStats {
    pub total: usize,
    pub per_category: BTreeMap<Category, usize>,
    pub high: usize,
    pub medium: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    categories: BTreeMap<Category, Vec<MetricEntry>>,
    flat_lookup: HashMap<String, (Category, Priority)>,
    category_keywords: BTreeMap<Category, Vec<String>>,
    loaded_at: Option<i64>,
    source_version: String,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::empty()
    }
}

/// Parse a catalog from its JSON representation.
pub fn load_catalog(bytes: &[u8]) -> Result<Catalog, CatalogError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CatalogError::Parse {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    let wire: WireCatalog = serde_json::from_str(text).map_err(|e| CatalogError::Parse {
        offset: byte_offset(text, &e),
        message: e.to_string(),
    })?;

    let mut catalog = Catalog::empty();
    catalog.source_version = wire.version;
    for (cat_id, entries) in wire.categories {
        let category: Category = cat_id.parse()?;
        for w in entries {
            if !is_valid_metric_name(&w.name) {
                return Err(CatalogError::InvalidName(w.name));
            }
            let metric_type =
                MetricType::parse(&w.metric_type).ok_or_else(|| CatalogError::UnknownValue {
                    name: w.name.clone(),
                    field: "type",
                    value: w.metric_type.clone(),
                })?;
            let priority =
                Priority::parse(&w.priority).ok_or_else(|| CatalogError::UnknownValue {
                    name: w.name.clone(),
                    field: "priority",
                    value: w.priority.clone(),
                })?;
            if catalog.contains(&w.name) {
                return Err(CatalogError::DuplicateMetric(w.name));
            }
            catalog.insert(MetricEntry {
                keywords: normalize_keywords(w.keywords),
                name: w.name,
                metric_type,
                help: w.help,
                priority,
                category,
            });
        }
    }
    Ok(catalog)
}

fn normalize_keywords(raw: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(raw.len().min(MAX_KEYWORDS));
    for k in raw {
        let k = k.trim().to_lowercase();
        if k.is_empty() || out.contains(&k) {
            continue;
        }
        out.push(k);
        if out.len() == MAX_KEYWORDS {
            break;
        }
    }
    out
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog {
            categories: BTreeMap::new(),
            flat_lookup: HashMap::new(),
            category_keywords: crate::config::default_category_keywords(),
            loaded_at: None,
            source_version: String::new(),
        }
    }

    pub fn source_version(&self) -> &str {
        &self.source_version
    }

    pub fn loaded_at(&self) -> Option<i64> {
        self.loaded_at
    }

    pub fn set_loaded_at(&mut self, ts: i64) {
        self.loaded_at = Some(ts);
    }

    pub fn category_keywords(&self) -> &BTreeMap<Category, Vec<String>> {
        &self.category_keywords
    }

    pub fn set_category_keywords(&mut self, map: BTreeMap<Category, Vec<String>>) {
        self.category_keywords = map;
    }

    pub fn len(&self) -> usize {
        self.flat_lookup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat_lookup.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<(Category, Priority)> {
        self.flat_lookup.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.flat_lookup.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&MetricEntry> {
        let (cat, _) = self.lookup(name)?;
        let list = self.categories.get(&cat)?;
        list.binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
            .map(|i| &list[i])
    }

    /// Entries of a category, sorted by name.
    pub fn category(&self, category: Category) -> &[MetricEntry] {
        self.categories
            .get(&category)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn categories(&self) -> impl Iterator<Item = (Category, &[MetricEntry])> {
        self.categories.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    /// All entries ordered by (category id, metric name).
    pub fn entries(&self) -> impl Iterator<Item = &MetricEntry> {
        self.categories.values().flatten()
    }

    pub fn flat_lookup(&self) -> &HashMap<String, (Category, Priority)> {
        &self.flat_lookup
    }

    /// Candidate entries for a set of categories.
    ///
    /// With categories, returns every entry in them (Medium only when
    /// `include_medium`). Without categories, returns only High-priority
    /// entries across the whole catalog. Ordered by (category id, name).
    pub fn metrics_in_categories(
        &self,
        categories: &[Category],
        include_medium: bool,
    ) -> Vec<&MetricEntry> {
        if categories.is_empty() {
            return self
                .entries()
                .filter(|e| e.priority == Priority::High)
                .collect();
        }
        let mut wanted: Vec<Category> = categories.to_vec();
        wanted.sort();
        wanted.dedup();
        wanted
            .into_iter()
            .flat_map(|c| self.category(c).iter())
            .filter(|e| include_medium || e.priority == Priority::High)
            .collect()
    }

    pub fn stats(&self) -> CatalogStats {
        let mut stats = CatalogStats::default();
        for (cat, list) in &self.categories {
            stats.per_category.insert(*cat, list.len());
            stats.total += list.len();
            for e in list {
                match e.priority {
                    Priority::High => stats.high += 1,
                    Priority::Medium => stats.medium += 1,
                }
            }
        }
        stats
    }

    /// Insert an entry. Returns false (and leaves the catalog untouched) if
    /// the name is already present.
    pub fn insert(&mut self, entry: MetricEntry) -> bool {
        if self.flat_lookup.contains_key(&entry.name) {
            return false;
        }
        self.flat_lookup
            .insert(entry.name.clone(), (entry.category, entry.priority));
        let list = self.categories.entry(entry.category).or_default();
        let pos = list
            .binary_search_by(|e| e.name.cmp(&entry.name))
            .unwrap_or_else(|p| p);
        list.insert(pos, entry);
        true
    }

    pub fn remove(&mut self, name: &str) -> Option<MetricEntry> {
        let (cat, _) = self.flat_lookup.remove(name)?;
        let list = self.categories.get_mut(&cat)?;
        let pos = list.binary_search_by(|e| e.name.as_str().cmp(name)).ok()?;
        let entry = list.remove(pos);
        if list.is_empty() {
            self.categories.remove(&cat);
        }
        Some(entry)
    }

    /// Serialize to the catalog JSON schema.
    pub fn to_json(&self) -> String {
        let categories = self
            .categories
            .iter()
            .map(|(cat, list)| {
                let entries = list
                    .iter()
                    .map(|e| WireEntry {
                        name: e.name.clone(),
                        metric_type: e.metric_type.as_str().to_string(),
                        help: e.help.clone(),
                        priority: e.priority.as_str().to_string(),
                        keywords: e.keywords.clone(),
                    })
                    .collect();
                (cat.as_str(), entries)
            })
            .collect();
        serde_json::to_string_pretty(&WireCatalogOut {
            version: &self.source_version,
            categories,
        })
        .expect("catalog serialization is infallible")
    }
}

/// Shared, swappable catalog.
///
/// Readers take a cheap `Arc` snapshot; writers build the next generation
/// from the current one and swap it in under the write lock, so a reader
/// sees either the old catalog or the fully merged one.
#[derive(Debug, Default)]
pub struct CatalogHandle {
    inner: RwLock<Arc<Catalog>>,
}

impl CatalogHandle {
    pub fn new(catalog: Catalog) -> Self {
        CatalogHandle {
            inner: RwLock::new(Arc::new(catalog)),
        }
    }

    pub fn snapshot(&self) -> Arc<Catalog> {
        self.inner
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .clone()
    }

    /// Apply `f` to a copy of the current catalog and publish the result.
    pub fn update<R>(&self, f: impl FnOnce(&mut Catalog) -> R) -> R {
        let mut guard = self.inner.write().unwrap_or_else(|p| p.into_inner());
        let mut next = Catalog::clone(&guard);
        let out = f(&mut next);
        *guard = Arc::new(next);
        out
    }
}
