//! Quote-aware delimiter analysis shared by repair and validation.

pub(crate) const NONE: usize = usize::MAX;

/// Marks bytes that belong to string literals (quotes included).
/// Handles `"` and `'` with backslash escapes, and raw backtick strings.
pub(crate) fn string_mask(s: &str) -> Result<Vec<bool>, &'static str> {
    let b = s.as_bytes();
    let mut mask = vec![false; b.len()];
    let mut i = 0;
    while i < b.len() {
        let q = b[i];
        if q == b'"' || q == b'\'' || q == b'`' {
            mask[i] = true;
            i += 1;
            loop {
                if i >= b.len() {
                    return Err("unterminated string literal");
                }
                mask[i] = true;
                if b[i] == b'\\' && q != b'`' {
                    if i + 1 < b.len() {
                        mask[i + 1] = true;
                    }
                    i += 2;
                    continue;
                }
                if b[i] == q {
                    i += 1;
                    break;
                }
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    Ok(mask)
}

pub(crate) fn closer_of(open: u8) -> u8 {
    match open {
        b'(' => b')',
        b'[' => b']',
        _ => b'}',
    }
}

pub(crate) fn is_ident(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b':'
}

/// Delimiter structure of a balanced query.
pub(crate) struct Layout {
    pub mask: Vec<bool>,
    /// Index of the matching delimiter, or `NONE`.
    pub partner: Vec<usize>,
    /// Number of open delimiters enclosing each byte.
    pub depth: Vec<u32>,
    /// Innermost enclosing opener for each byte, or `NONE`.
    pub parent: Vec<usize>,
}

/// Returns `None` when delimiters are unbalanced or strings unterminated.
pub(crate) fn layout(s: &str) -> Option<Layout> {
    let mask = string_mask(s).ok()?;
    let b = s.as_bytes();
    let mut partner = vec![NONE; b.len()];
    let mut depth = vec![0u32; b.len()];
    let mut parent = vec![NONE; b.len()];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..b.len() {
        depth[i] = stack.len() as u32;
        parent[i] = stack.last().copied().unwrap_or(NONE);
        if mask[i] {
            continue;
        }
        match b[i] {
            b'(' | b'[' | b'{' => stack.push(i),
            c @ (b')' | b']' | b'}') => {
                let open = stack.pop()?;
                if closer_of(b[open]) != c {
                    return None;
                }
                partner[open] = i;
                partner[i] = open;
                depth[i] = stack.len() as u32;
                parent[i] = stack.last().copied().unwrap_or(NONE);
            }
            _ => {}
        }
    }
    stack.is_empty().then_some(Layout {
        mask,
        partner,
        depth,
        parent,
    })
}

/// The identifier that ends right before `at` (skipping whitespace), as a
/// byte range.
pub(crate) fn ident_before(s: &str, at: usize) -> Option<(usize, usize)> {
    let b = s.as_bytes();
    let mut end = at;
    while end > 0 && b[end - 1].is_ascii_whitespace() {
        end -= 1;
    }
    let mut start = end;
    while start > 0 && is_ident(b[start - 1]) {
        start -= 1;
    }
    (start < end).then_some((start, end))
}
