//! Startup reconciliation of the bundled catalog against live metric names.
//!
//! Names under a GPU vendor prefix are left to discovery, so the two startup
//! merges touch disjoint name sets and commute.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Duration;

use serde::Serialize;

use crate::catalog::{
    generate_keywords_with, naming, Catalog, Category, KeywordRules, MetricEntry, MetricType,
    Priority, Tiers,
};
use crate::clock::Stopwatch;
use crate::discovery::VendorPrefixConfig;

/// Category for new metrics whose name shares no prefix with the catalog.
pub const FALLBACK_CATEGORY: Category = Category::Observability;

/// Token-boundary prefix → category.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PrefixMap {
    map: HashMap<String, Category>,
}

impl PrefixMap {
    pub fn get(&self, prefix: &str) -> Option<Category> {
        self.map.get(prefix).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Proper prefixes of `name` ending at a `_` or `:` delimiter, longest first.
pub fn token_prefixes(name: &str) -> impl Iterator<Item = &str> {
    name.char_indices()
        .rev()
        .filter(|(i, c)| (*c == '_' || *c == ':') && *i + 1 < name.len())
        .map(move |(i, _)| &name[..=i])
}

pub fn build_prefix_map(catalog: &Catalog) -> PrefixMap {
    build_prefix_map_excluding(catalog, None)
}

/// Build the prefix map, ignoring names under `skip`'s vendor prefixes.
/// Each prefix maps to the category holding most of the names under it;
/// ties go to the lexicographically smaller category id.
pub fn build_prefix_map_excluding(
    catalog: &Catalog,
    skip: Option<&VendorPrefixConfig>,
) -> PrefixMap {
    let mut votes: HashMap<&str, BTreeMap<Category, usize>> = HashMap::new();
    for e in catalog.entries() {
        if skip.is_some_and(|s| s.matches(&e.name)) {
            continue;
        }
        for p in token_prefixes(&e.name) {
            *votes.entry(p).or_default().entry(e.category).or_default() += 1;
        }
    }
    let map = votes
        .into_iter()
        .map(|(p, counts)| {
            // BTreeMap iterates in category order, so the first maximum is the
            // lexicographically smallest.
            let mut best = (Category::ALL[0], 0usize);
            for (c, n) in counts {
                if n > best.1 {
                    best = (c, n);
                }
            }
            (p.to_string(), best.0)
        })
        .collect();
    PrefixMap { map }
}

pub fn categorize_new_metric(name: &str, pm: &PrefixMap) -> Category {
    token_prefixes(name)
        .find_map(|p| pm.get(p))
        .unwrap_or(FALLBACK_CATEGORY)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdoptedMetric {
    pub name: String,
    pub category: Category,
    pub metric_type: MetricType,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub stale: Vec<String>,
    pub adopted: Vec<AdoptedMetric>,
    pub unchanged_count: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ValidationReport {
    pub fn empty() -> Self {
        ValidationReport {
            stale: Vec::new(),
            adopted: Vec::new(),
            unchanged_count: 0,
            elapsed: Duration::ZERO,
        }
    }
}

/// Compare the catalog with the live series names. Report only; see
/// [`apply_report`].
pub fn validate_catalog<'a, I>(
    catalog: &Catalog,
    live_names: I,
    gpu_prefixes: &VendorPrefixConfig,
) -> ValidationReport
where
    I: IntoIterator<Item = &'a str>,
{
    let watch = Stopwatch::start();
    let raw: HashSet<&str> = live_names
        .into_iter()
        .filter(|n| !gpu_prefixes.matches(n))
        .collect();
    let families = naming::collapse_families(raw.iter().copied());

    let mut stale = Vec::new();
    let mut unchanged_count = 0;
    for e in catalog.entries() {
        if gpu_prefixes.matches(&e.name) {
            continue;
        }
        if families.contains_key(&e.name)
            || raw.contains(e.name.as_str())
            || has_live_child(e, &raw)
        {
            unchanged_count += 1;
        } else {
            stale.push(e.name.clone());
        }
    }
    stale.sort();

    let pm = build_prefix_map_excluding(catalog, Some(gpu_prefixes));
    let adopted = families
        .into_iter()
        .filter(|(name, _)| !catalog.contains(name) && !raw_is_child_of_catalog(name, catalog))
        .map(|(name, metric_type)| AdoptedMetric {
            category: categorize_new_metric(&name, &pm),
            name,
            metric_type,
        })
        .collect();

    ValidationReport {
        stale,
        adopted,
        unchanged_count,
        elapsed: watch.elapsed(),
    }
}

/// A histogram or summary stays live while any of its series remain, even if
/// the scrape lost some of them.
fn has_live_child(e: &MetricEntry, raw: &HashSet<&str>) -> bool {
    matches!(e.metric_type, MetricType::Histogram | MetricType::Summary)
        && ["_bucket", "_sum", "_count"]
            .iter()
            .any(|s| raw.contains(format!("{}{s}", e.name).as_str()))
}

/// True when `name` is a `_sum`/`_count`/`_bucket` child of a catalog family
/// that the live set did not expose in full.
fn raw_is_child_of_catalog(name: &str, catalog: &Catalog) -> bool {
    ["_bucket", "_sum", "_count"].iter().any(|s| {
        name.strip_suffix(s)
            .and_then(|base| catalog.get(base))
            .is_some_and(|e| matches!(e.metric_type, MetricType::Histogram | MetricType::Summary))
    })
}

/// Remove stale entries and insert adopted ones (Medium priority,
/// type/pattern/name keywords). Returns (removed, added).
pub fn apply_report(
    catalog: &mut Catalog,
    report: &ValidationReport,
    rules: &KeywordRules,
) -> (usize, usize) {
    let removed = report
        .stale
        .iter()
        .filter(|n| catalog.remove(n).is_some())
        .count();
    let added = report
        .adopted
        .iter()
        .filter(|a| {
            catalog.insert(MetricEntry {
                name: a.name.clone(),
                metric_type: a.metric_type,
                help: String::new(),
                priority: Priority::Medium,
                keywords: generate_keywords_with(&a.name, a.metric_type, "", rules, Tiers::ADOPTED),
                category: a.category,
            })
        })
        .count();
    (removed, added)
}
