//! Syntactic repair of PromQL strings.
//!
//! Passes run in a fixed order: trailing commas (before `}` or `)` and at
//! the end), delimiter balancing, missing ranges in `rate`/`irate`/`increase`, and
//! wrapping of top-level range vectors in `rate(...)`. The output of a
//! successful repair is a fixed point.

use serde::{Deserialize, Serialize};

use super::scan::{closer_of, ident_before, is_ident, layout, string_mask, Layout};
use crate::error::RepairError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairKind {
    TrailingComma,
    ParenBalance,
    MissingRange,
    BareRangeWrapped,
}

pub(crate) const RANGE_CALLS: [&str; 3] = ["rate", "irate", "increase"];

/// Repair `query`, using `rate_syntax` (e.g. `[1h]`) wherever a range is
/// missing. Returns the repaired query and the kinds of repair applied.
pub fn repair(query: &str, rate_syntax: &str) -> Result<(String, Vec<RepairKind>), RepairError> {
    let fail = |reason: &str| RepairError {
        original: query.to_string(),
        reason: reason.to_string(),
    };
    let range = range_body(rate_syntax).ok_or_else(|| fail("rate syntax is not a duration"))?;
    let mut kinds = Vec::new();
    let mut note = |k: RepairKind, changed: bool| {
        if changed && !kinds.contains(&k) {
            kinds.push(k);
        }
    };

    let q = query.trim();
    if q.is_empty() {
        return Err(fail("empty query"));
    }
    let mask = string_mask(q).map_err(fail)?;
    let (q, changed) = strip_trailing_commas(q, &mask);
    note(RepairKind::TrailingComma, changed);

    let b = balance(&q).map_err(fail)?;
    note(RepairKind::ParenBalance, b.reshaped);
    note(RepairKind::TrailingComma, b.commas);
    // Dropped closers can leave whitespace at either end.
    let q = b.out.trim().to_string();
    if q.is_empty() {
        return Err(fail("empty query"));
    }

    let (q, filled) = fill_empty_ranges(&q, &range);
    let (q, inserted) = add_missing_ranges(q, &range).map_err(fail)?;
    note(RepairKind::MissingRange, filled || inserted);

    let (q, wrapped) = wrap_bare_ranges(q).map_err(fail)?;
    note(RepairKind::BareRangeWrapped, wrapped);
    Ok((q, kinds))
}

/// `[1h]` -> `1h`; accepts a bare `1h` too.
fn range_body(rate_syntax: &str) -> Option<String> {
    let t = rate_syntax.trim();
    let inner = t.strip_prefix('[').and_then(|x| x.strip_suffix(']')).unwrap_or(t).trim();
    let ok = !inner.is_empty()
        && inner.bytes().all(|c| c.is_ascii_alphanumeric())
        && inner.as_bytes()[0].is_ascii_digit();
    ok.then(|| inner.to_string())
}

/// Truncate a run of whitespace/commas at the end of `out` if it holds a comma.
fn drop_trailing_comma(out: &mut Vec<u8>) -> bool {
    let keep = out
        .iter()
        .rposition(|c| !(c.is_ascii_whitespace() || *c == b','))
        .map_or(0, |p| p + 1);
    if out[keep..].contains(&b',') {
        out.truncate(keep);
        true
    } else {
        false
    }
}

fn strip_trailing_commas(q: &str, mask: &[bool]) -> (String, bool) {
    let mut out = Vec::with_capacity(q.len());
    let mut changed = false;
    for (i, &c) in q.as_bytes().iter().enumerate() {
        if matches!(c, b'}' | b')') && !mask[i] {
            changed |= drop_trailing_comma(&mut out);
        }
        out.push(c);
    }
    changed |= drop_trailing_comma(&mut out);
    (String::from_utf8(out).expect("only ASCII bytes removed"), changed)
}

struct Balanced {
    out: String,
    reshaped: bool,
    commas: bool,
}

fn balance(q: &str) -> Result<Balanced, &'static str> {
    let mask = string_mask(q)?;
    let mut out: Vec<u8> = Vec::with_capacity(q.len() + 4);
    let mut stack: Vec<u8> = Vec::new();
    let mut reshaped = false;
    let mut commas = false;
    let mut close = |out: &mut Vec<u8>, c: u8| {
        if matches!(c, b'}' | b')') {
            commas |= drop_trailing_comma(out);
        }
        out.push(c);
    };
    for (i, &c) in q.as_bytes().iter().enumerate() {
        if mask[i] {
            out.push(c);
            continue;
        }
        match c {
            b'(' | b'[' | b'{' => {
                if matches!(stack.last(), Some(b'{') | Some(b'[')) {
                    return Err("delimiter opened inside a label selector or range");
                }
                stack.push(c);
                out.push(c);
            }
            b')' | b']' | b'}' => {
                let Some(pos) = stack.iter().rposition(|&o| closer_of(o) == c) else {
                    reshaped = true;
                    continue;
                };
                while stack.len() > pos + 1 {
                    let o = stack.pop().expect("non-empty");
                    close(&mut out, closer_of(o));
                    reshaped = true;
                }
                stack.pop();
                close(&mut out, c);
            }
            _ => out.push(c),
        }
    }
    while let Some(o) = stack.pop() {
        close(&mut out, closer_of(o));
        reshaped = true;
    }
    Ok(Balanced {
        out: String::from_utf8(out).expect("only ASCII bytes inserted or removed"),
        reshaped,
        commas,
    })
}

fn fill_empty_ranges(q: &str, range: &str) -> (String, bool) {
    let lay = layout(q).expect("balanced");
    let b = q.as_bytes();
    let mut out = q.to_string();
    let mut changed = false;
    for i in (0..b.len()).rev() {
        if b[i] == b'[' && !lay.mask[i] {
            let j = lay.partner[i];
            if q[i + 1..j].trim().is_empty() {
                out.replace_range(i + 1..j, range);
                changed = true;
            }
        }
    }
    (out, changed)
}

/// Byte index of the `(` of a `rate`/`irate`/`increase` call starting at `i`.
fn range_call_at(q: &str, lay: &Layout, i: usize) -> Option<usize> {
    let b = q.as_bytes();
    if lay.mask[i] || (i > 0 && is_ident(b[i - 1])) {
        return None;
    }
    if lay.parent[i] != usize::MAX && b[lay.parent[i]] == b'{' {
        return None;
    }
    let name = RANGE_CALLS.iter().find(|n| q[i..].starts_with(**n))?;
    let mut j = i + name.len();
    if j < b.len() && is_ident(b[j]) {
        return None;
    }
    while j < b.len() && b[j].is_ascii_whitespace() {
        j += 1;
    }
    (j < b.len() && b[j] == b'(').then_some(j)
}

/// Whether the call's argument list holds a `[...]` directly.
fn has_direct_range(lay: &Layout, q: &str, open: usize) -> bool {
    let close = lay.partner[open];
    (open + 1..close).any(|j| q.as_bytes()[j] == b'[' && !lay.mask[j] && lay.parent[j] == open)
}

/// End of a plain vector selector starting at `from`, if the argument is
/// one (`name`, `name{...}` or `{...}`, optionally followed by modifiers).
fn plain_selector_end(q: &str, lay: &Layout, from: usize, to: usize) -> Option<usize> {
    let b = q.as_bytes();
    let mut i = from;
    while i < to && b[i].is_ascii_whitespace() {
        i += 1;
    }
    let name_start = i;
    while i < to && is_ident(b[i]) {
        i += 1;
    }
    let mut end = i;
    let mut j = i;
    while j < to && b[j].is_ascii_whitespace() {
        j += 1;
    }
    if j < to && b[j] == b'{' {
        end = lay.partner[j] + 1;
    }
    if end == name_start || (end > name_start && b[name_start].is_ascii_digit()) {
        return None;
    }
    let rest = q[end..to].trim_start();
    let modifier = rest.starts_with("offset") || rest.starts_with('@');
    (rest.is_empty() || modifier).then_some(end)
}

fn add_missing_ranges(mut q: String, range: &str) -> Result<(String, bool), &'static str> {
    let mut changed = false;
    'outer: loop {
        let lay = layout(&q).expect("balanced");
        for i in 0..q.len() {
            let Some(open) = range_call_at(&q, &lay, i) else {
                continue;
            };
            if has_direct_range(&lay, &q, open) {
                continue;
            }
            let close = lay.partner[open];
            if q[open + 1..close].trim().is_empty() {
                return Err("range function called without an argument");
            }
            let insert = match plain_selector_end(&q, &lay, open + 1, close) {
                Some(at) => (at, format!("[{range}]")),
                None => (open + 1 + q[open + 1..close].trim_end().len(), format!("[{range}:]")),
            };
            q.insert_str(insert.0, &insert.1);
            changed = true;
            continue 'outer;
        }
        return Ok((q, changed));
    }
}

fn wrap_bare_ranges(mut q: String) -> Result<(String, bool), &'static str> {
    let mut changed = false;
    loop {
        let lay = layout(&q).expect("balanced");
        let b = q.as_bytes();
        let Some(i) = (0..b.len()).find(|&i| b[i] == b'[' && !lay.mask[i] && lay.depth[i] == 0) else {
            return Ok((q, changed));
        };
        let k = q[..i]
            .trim_end()
            .len()
            .checked_sub(1)
            .ok_or("range without a vector selector")?;
        let (start, plain) = match b[k] {
            b'}' | b')' => {
                let o = lay.partner[k];
                let start = ident_before(&q, o).map_or(o, |(s, _)| s);
                (start, b[k] == b'}')
            }
            c if is_ident(c) => (ident_before(&q, k + 1).expect("identifier").0, true),
            b']' => return Err("consecutive range selectors"),
            _ => return Err("range without a vector selector"),
        };
        let close = lay.partner[i];
        let mut end = close + 1;
        let after = &q[end..];
        let trimmed = after.trim_start();
        if let Some(rest) = trimmed.strip_prefix("offset") {
            let arg = rest.trim_start();
            let len = arg
                .bytes()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == b'-')
                .count();
            if len > 0 && rest.len() > arg.len() {
                end += after.len() - arg.len() + len;
            }
        }
        let needs_colon = !plain && !q[i..close].contains(':');
        let mut next = String::with_capacity(q.len() + 7);
        next.push_str(&q[..start]);
        next.push_str("rate(");
        if needs_colon {
            next.push_str(&q[start..close]);
            next.push(':');
            next.push_str(&q[close..end]);
        } else {
            next.push_str(&q[start..end]);
        }
        next.push(')');
        next.push_str(&q[end..]);
        q = next;
        changed = true;
    }
}
