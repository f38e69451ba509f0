//! Runtime discovery of vendor GPU and inference-framework metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    generate_keywords_with, naming, Catalog, Category, KeywordRules, MetricEntry, Priority, Tiers,
};
use crate::clock::Stopwatch;
use crate::error::ConfigError;

/// Environment variable holding extra comma-separated prefixes.
pub const PREFIX_ENV: &str = "GPU_METRIC_PREFIXES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vendor {
    #[serde(rename = "NVIDIA")]
    Nvidia,
    Intel,
    #[serde(rename = "AMD")]
    Amd,
    Framework,
    Custom,
}

impl Vendor {
    /// Hardware vendors in election tie-break order.
    pub const HARDWARE: [Vendor; 3] = [Vendor::Nvidia, Vendor::Intel, Vendor::Amd];

    fn parse(s: &str) -> Option<Vendor> {
        match s.to_ascii_lowercase().as_str() {
            "nvidia" => Some(Vendor::Nvidia),
            "intel" => Some(Vendor::Intel),
            "amd" => Some(Vendor::Amd),
            "framework" => Some(Vendor::Framework),
            "custom" => Some(Vendor::Custom),
            _ => None,
        }
    }
}

impl fmt::Display for Vendor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vendor::Nvidia => "NVIDIA",
            Vendor::Intel => "Intel",
            Vendor::Amd => "AMD",
            Vendor::Framework => "Framework",
            Vendor::Custom => "Custom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VendorPrefixConfig {
    vendors: Vec<(Vendor, Vec<String>)>,
    custom: Vec<String>,
}

impl Default for VendorPrefixConfig {
    fn default() -> Self {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        VendorPrefixConfig {
            vendors: vec![
                (Vendor::Nvidia, v(&["DCGM_", "nvidia_gpu_"])),
                (Vendor::Intel, v(&["habanalabs_", "xpu_"])),
                (Vendor::Amd, v(&["amdgpu_", "rocm_"])),
                (Vendor::Framework, v(&["vllm:", "gpu_"])),
            ],
            custom: Vec::new(),
        }
    }
}

impl VendorPrefixConfig {
    /// Add prefixes on top of the defaults. Duplicates are ignored.
    pub fn with_custom<I, S>(mut self, prefixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for p in prefixes {
            let p = p.into();
            if !p.is_empty() && !self.custom.contains(&p) && self.vendor_of_prefix(&p).is_none() {
                self.custom.push(p);
            }
        }
        self
    }

    /// Defaults plus the comma-separated list in `GPU_METRIC_PREFIXES`.
    pub fn from_env() -> Self {
        let extra = std::env::var(PREFIX_ENV).unwrap_or_default();
        Self::default().with_custom(parse_prefix_list(&extra))
    }

    fn vendor_of_prefix(&self, prefix: &str) -> Option<Vendor> {
        self.vendors
            .iter()
            .find(|(_, ps)| ps.iter().any(|p| p == prefix))
            .map(|(v, _)| *v)
    }

    pub fn prefixes(&self, vendor: Vendor) -> &[String] {
        if vendor == Vendor::Custom {
            return &self.custom;
        }
        self.vendors
            .iter()
            .find(|(v, _)| *v == vendor)
            .map(|(_, p)| p.as_slice())
            .unwrap_or(&[])
    }

    /// The vendor whose prefix a series name starts with, if any.
    pub fn vendor_of(&self, name: &str) -> Option<Vendor> {
        self.vendors
            .iter()
            .find(|(_, ps)| ps.iter().any(|p| name.starts_with(p.as_str())))
            .map(|(v, _)| *v)
            .or_else(|| {
                self.custom
                    .iter()
                    .any(|p| name.starts_with(p.as_str()))
                    .then_some(Vendor::Custom)
            })
    }

    pub fn matches(&self, name: &str) -> bool {
        self.vendor_of(name).is_some()
    }
}

pub fn parse_prefix_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

/// High-priority regex rules for discovered metrics; anything unmatched is
/// Medium.
#[derive(Clone, Debug)]
pub struct PriorityPatterns {
    rules: Vec<(Vendor, Regex)>,
}

#[derive(Deserialize)]
struct RawPriorities {
    high: Vec<RawPriorityRule>,
}

#[derive(Deserialize)]
struct RawPriorityRule {
    vendor: String,
    regex: String,
}

impl PriorityPatterns {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        const FILE: &str = "gpu_priority.json";
        let raw: RawPriorities = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            file: FILE.into(),
            message: e.to_string(),
        })?;
        let rules = raw
            .high
            .into_iter()
            .map(|r| {
                let vendor = Vendor::parse(&r.vendor).ok_or_else(|| {
                    ConfigError::Invalid(format!("{FILE}: unknown vendor `{}`", r.vendor))
                })?;
                let re = Regex::new(&r.regex).map_err(|source| ConfigError::Regex {
                    file: FILE.into(),
                    pattern: r.regex.clone(),
                    source,
                })?;
                Ok((vendor, re))
            })
            .collect::<Result<_, ConfigError>>()?;
        Ok(PriorityPatterns { rules })
    }

    pub fn builtin() -> Self {
        Self::from_json(crate::config::GPU_PRIORITY_JSON).expect("shipped priority patterns are valid")
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules_for(&self, vendor: Vendor) -> usize {
        self.rules.iter().filter(|(v, _)| *v == vendor).count()
    }

    pub fn assign(&self, name: &str) -> Priority {
        if self.rules.iter().any(|(_, re)| re.is_match(name)) {
            Priority::High
        } else {
            Priority::Medium
        }
    }
}

pub fn assign_gpu_priority(name: &str, priorities: &PriorityPatterns) -> Priority {
    priorities.assign(name)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscoveryResult {
    pub primary_vendor: Option<Vendor>,
    pub discovered: Vec<MetricEntry>,
    pub per_vendor_match_counts: BTreeMap<Vendor, usize>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl DiscoveryResult {
    pub fn empty() -> Self {
        DiscoveryResult {
            primary_vendor: None,
            discovered: Vec::new(),
            per_vendor_match_counts: BTreeMap::new(),
            elapsed: Duration::ZERO,
        }
    }
}

/// Hardware vendor with the most matches; ties go to the earlier vendor in
/// [`Vendor::HARDWARE`]. Framework and custom matches never vote.
pub fn elect_vendor(counts: &BTreeMap<Vendor, usize>) -> Option<Vendor> {
    let mut best: Option<(Vendor, usize)> = None;
    for v in Vendor::HARDWARE {
        let n = counts.get(&v).copied().unwrap_or(0);
        if n > 0 && best.is_none_or(|(_, b)| n > b) {
            best = Some((v, n));
        }
    }
    best.map(|(v, _)| v)
}

pub fn discover_gpu_metrics<'a, I>(
    all_names: I,
    prefixes: &VendorPrefixConfig,
    priorities: &PriorityPatterns,
    rules: &KeywordRules,
) -> DiscoveryResult
where
    I: IntoIterator<Item = &'a str>,
{
    let watch = Stopwatch::start();
    let matched = all_names.into_iter().filter(|n| prefixes.matches(n));
    let families = naming::collapse_families(matched);

    let mut counts: BTreeMap<Vendor, usize> = BTreeMap::new();
    let mut discovered = Vec::with_capacity(families.len());
    for (name, metric_type) in families {
        let Some(vendor) = prefixes.vendor_of(&name) else {
            continue;
        };
        *counts.entry(vendor).or_default() += 1;
        discovered.push(MetricEntry {
            keywords: generate_keywords_with(&name, metric_type, "", rules, Tiers::DISCOVERY),
            priority: priorities.assign(&name),
            help: String::new(),
            category: Category::GpuAi,
            metric_type,
            name,
        });
    }
    DiscoveryResult {
        primary_vendor: elect_vendor(&counts),
        discovered,
        per_vendor_match_counts: counts,
        elapsed: watch.elapsed(),
    }
}

/// Insert discovered entries into `gpu_ai`. Entries already in the catalog
/// keep their existing record. Returns the number of entries added.
pub fn merge_discovery(catalog: &mut Catalog, result: &DiscoveryResult) -> usize {
    result
        .discovered
        .iter()
        .filter(|e| catalog.insert((*e).clone()))
        .count()
}
