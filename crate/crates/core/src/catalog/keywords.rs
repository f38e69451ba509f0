//! Tiered keyword generation for catalog entries.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use regex::Regex;
use serde::Deserialize;

use super::{naming, MetricType};
use crate::error::ConfigError;

pub const MAX_KEYWORDS: usize = 12;

/// Which keyword sources to draw from. Sources are always applied in the
/// fixed order curated, type, pattern, name, help.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tiers {
    pub curated: bool,
    pub type_based: bool,
    pub pattern: bool,
    pub name: bool,
    pub help: bool,
}

impl Tiers {
    pub const ALL: Tiers = Tiers {
        curated: true,
        type_based: true,
        pattern: true,
        name: true,
        help: true,
    };
    /// No HELP text is available for names discovered at runtime.
    pub const DISCOVERY: Tiers = Tiers {
        help: false,
        ..Tiers::ALL
    };
    pub const ADOPTED: Tiers = Tiers {
        curated: false,
        help: false,
        ..Tiers::ALL
    };
}

#[derive(Deserialize)]
struct RawRules {
    curated: BTreeMap<String, Vec<String>>,
    type_keywords: BTreeMap<String, Vec<String>>,
    patterns: Vec<RawPattern>,
    stopwords: Vec<String>,
}

#[derive(Deserialize)]
struct RawPattern {
    regex: String,
    keywords: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct KeywordRules {
    pub curated: HashMap<String, Vec<String>>,
    pub type_keywords: HashMap<MetricType, Vec<String>>,
    pub patterns: Vec<(Regex, Vec<String>)>,
    pub stopwords: BTreeSet<String>,
}

impl KeywordRules {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        const FILE: &str = "keyword_rules.json";
        let raw: RawRules = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            file: FILE.into(),
            message: e.to_string(),
        })?;
        let lower = |v: Vec<String>| v.into_iter().map(|k| k.to_lowercase()).collect::<Vec<_>>();
        let mut type_keywords = HashMap::new();
        for (t, kws) in raw.type_keywords {
            let ty = MetricType::parse(&t)
                .ok_or_else(|| ConfigError::Invalid(format!("{FILE}: unknown metric type `{t}`")))?;
            type_keywords.insert(ty, lower(kws));
        }
        let patterns = raw
            .patterns
            .into_iter()
            .map(|p| {
                Regex::new(&p.regex)
                    .map(|re| (re, lower(p.keywords)))
                    .map_err(|source| ConfigError::Regex {
                        file: FILE.into(),
                        pattern: p.regex.clone(),
                        source,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KeywordRules {
            curated: raw
                .curated
                .into_iter()
                .map(|(k, v)| (k, lower(v)))
                .collect(),
            type_keywords,
            patterns,
            stopwords: raw.stopwords.into_iter().map(|s| s.to_lowercase()).collect(),
        })
    }

    /// The rules shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(crate::config::KEYWORD_RULES_JSON).expect("shipped keyword rules are valid")
    }
}

/// Generate up to [`MAX_KEYWORDS`] keywords from every tier.
pub fn generate_keywords(
    name: &str,
    metric_type: MetricType,
    help: &str,
    rules: &KeywordRules,
) -> Vec<String> {
    generate_keywords_with(name, metric_type, help, rules, Tiers::ALL)
}

pub fn generate_keywords_with(
    name: &str,
    metric_type: MetricType,
    help: &str,
    rules: &KeywordRules,
    tiers: Tiers,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(MAX_KEYWORDS);
    let mut push = |k: &str| {
        if out.len() < MAX_KEYWORDS && !k.is_empty() && !out.iter().any(|o| o == k) {
            out.push(k.to_string());
        }
    };

    if tiers.curated {
        if let Some(kws) = rules.curated.get(name) {
            kws.iter().for_each(|k| push(k));
        }
    }
    if tiers.type_based {
        if let Some(kws) = rules.type_keywords.get(&metric_type) {
            kws.iter().for_each(|k| push(k));
        }
    }
    let lower = name.to_lowercase();
    if tiers.pattern {
        for (re, kws) in &rules.patterns {
            if re.is_match(&lower) {
                kws.iter().for_each(|k| push(k));
            }
        }
    }
    if tiers.name {
        for tok in naming::name_tokens(name) {
            if tok.len() >= 3 {
                push(&tok);
            }
        }
    }
    if tiers.help {
        for word in help
            .split(|c: char| !c.is_ascii_alphanumeric())
            .map(str::to_lowercase)
        {
            if word.len() >= 3
                && !word.chars().all(|c| c.is_ascii_digit())
                && !rules.stopwords.contains(&word)
            {
                push(&word);
            }
        }
    }
    out
}
