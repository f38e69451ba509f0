//! Shipped configuration files and loading of user overrides.

use std::collections::BTreeMap;
use std::path::Path;

use crate::catalog::{Category, KeywordRules};
use crate::discovery::{PriorityPatterns, VendorPrefixConfig};
use crate::error::ConfigError;
use crate::intent::IntentLexicon;
use crate::selector::ScoringConfig;
use crate::temporal::TemporalConfig;

pub const KEYWORD_RULES_JSON: &str = include_str!("../data/keyword_rules.json");
pub const GPU_PRIORITY_JSON: &str = include_str!("../data/gpu_priority.json");
pub const INTENT_LEXICON_JSON: &str = include_str!("../data/intent_lexicon.json");
pub const SCORING_JSON: &str = include_str!("../data/scoring.json");
pub const CATEGORY_KEYWORDS_JSON: &str = include_str!("../data/category_keywords.json");

pub fn parse_category_keywords(text: &str) -> Result<BTreeMap<Category, Vec<String>>, ConfigError> {
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            file: "category_keywords.json".into(),
            message: e.to_string(),
        })?;
    raw.into_iter()
        .map(|(k, v)| {
            let cat = k
                .parse::<Category>()
                .map_err(|e| ConfigError::Invalid(format!("category_keywords.json: {e}")))?;
            Ok((cat, v.into_iter().map(|s| s.to_lowercase()).collect()))
        })
        .collect()
}

pub fn default_category_keywords() -> BTreeMap<Category, Vec<String>> {
    parse_category_keywords(CATEGORY_KEYWORDS_JSON).expect("shipped category keywords are valid")
}

/// Every tunable the pipeline reads.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub keyword_rules: KeywordRules,
    pub priorities: PriorityPatterns,
    pub prefixes: VendorPrefixConfig,
    pub lexicon: IntentLexicon,
    pub scoring: ScoringConfig,
    pub category_keywords: BTreeMap<Category, Vec<String>>,
    pub temporal: TemporalConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            keyword_rules: KeywordRules::builtin(),
            priorities: PriorityPatterns::builtin(),
            prefixes: VendorPrefixConfig::default(),
            lexicon: IntentLexicon::builtin(),
            scoring: ScoringConfig::builtin(),
            category_keywords: default_category_keywords(),
            temporal: TemporalConfig::default(),
        }
    }
}

impl EngineConfig {
    /// Load overrides from a directory. Files that are absent keep the
    /// shipped defaults.
    pub fn from_dir(dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg = EngineConfig::default();
        let read = |name: &str| -> Result<Option<String>, ConfigError> {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(ConfigError::Parse {
                    file: path.display().to_string(),
                    message: e.to_string(),
                }),
            }
        };
        if let Some(s) = read("keyword_rules.json")? {
            cfg.keyword_rules = KeywordRules::from_json(&s)?;
        }
        if let Some(s) = read("gpu_priority.json")? {
            cfg.priorities = PriorityPatterns::from_json(&s)?;
        }
        if let Some(s) = read("intent_lexicon.json")? {
            cfg.lexicon = IntentLexicon::from_json(&s)?;
        }
        if let Some(s) = read("scoring.json")? {
            cfg.scoring = ScoringConfig::from_json(&s)?;
        }
        if let Some(s) = read("category_keywords.json")? {
            cfg.category_keywords = parse_category_keywords(&s)?;
        }
        Ok(cfg)
    }
}
