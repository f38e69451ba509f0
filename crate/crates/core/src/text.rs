//! Question normalization and phrase matching.

/// Lowercased text with punctuation folded to single spaces, padded so
/// whole-word phrases can be found with a plain substring search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized(String);

impl Normalized {
    pub fn new(text: &str) -> Self {
        Normalized(format!(" {} ", normalize(text)))
    }

    /// Whole-word (or whole-phrase) containment. `phrase` must already be
    /// normalized.
    pub fn has(&self, phrase: &str) -> bool {
        if phrase.is_empty() {
            return false;
        }
        let mut needle = String::with_capacity(phrase.len() + 2);
        needle.push(' ');
        needle.push_str(phrase);
        needle.push(' ');
        self.0.contains(&needle)
    }

    pub fn as_str(&self) -> &str {
        self.0.trim()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.0.split_whitespace()
    }
}

/// Lowercase, drop apostrophes, replace anything outside `[a-z0-9:_-]` with
/// a space, collapse runs of whitespace.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars().flat_map(char::to_lowercase) {
        if c == '\'' || c == '\u{2019}' {
            continue;
        }
        if c.is_ascii_alphanumeric() || matches!(c, ':' | '_' | '-') {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding() {
        assert_eq!(normalize("  What's the TTFT?? "), "whats the ttft");
        let n = Normalized::new("Compare kube-proxy vs. node");
        assert!(n.has("vs"));
        assert!(n.has("kube-proxy"));
        assert!(!n.has("proxy"));
        assert!(n.has("compare kube-proxy"));
    }
}
