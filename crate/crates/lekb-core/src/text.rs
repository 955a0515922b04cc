//! Normalization and the hybrid string similarity used throughout the
//! pipeline.
//!
//! Two basic entities are compared as the maximum of a character-level
//! Ratcliff–Obershelp ratio and a token-level Jaccard index over normalized
//! values, so a pair scores high if either metric considers it close.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::entity::{BasicEntity, Role};

/// A value after role-aware normalization.
///
/// `text` is lower-cased, diacritic-stripped and whitespace-collapsed;
/// `tokens` is the set of maximal alphanumeric runs observed before any
/// role-specific space collapsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedValue {
    pub text: String,
    pub tokens: BTreeSet<String>,
}

/// Normalizes a raw value for comparison.
///
/// Applied in order: Unicode compatibility decomposition, removal of
/// combining marks, case folding, replacement of every non-alphanumeric
/// character by a space, whitespace collapsing, trimming. For
/// `registration_number` and `capital` all remaining internal spaces are then
/// removed from the text (tokens are unaffected), so "832 146 237" and
/// "832146237" normalize to the same text.
pub fn normalize_text(raw: &str, role: Role) -> NormalizedValue {
    let mut flat = String::with_capacity(raw.len());
    for c in raw.nfkd() {
        if is_combining_mark(c) {
            continue;
        }
        for lc in c.to_lowercase() {
            if lc.is_alphanumeric() {
                flat.push(lc);
            } else {
                flat.push(' ');
            }
        }
    }
    let mut text = String::with_capacity(flat.len());
    let mut tokens = BTreeSet::new();
    for run in flat.split(' ').filter(|run| !run.is_empty()) {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(run);
        tokens.insert(String::from(run));
    }
    if role.collapses_inner_spaces() {
        text.retain(|c| c != ' ');
    }
    NormalizedValue { text, tokens }
}

/// Ratcliff–Obershelp similarity of two strings: `2M / T` where `T` is the
/// total length and `M` the total length of matched blocks, found by
/// recursively locating the longest common block (ties broken by earliest
/// start in the first string, then in the second) and recursing on both
/// remainders. No junk heuristic. Both strings empty yields 1.0.
///
/// The directed block search is order-dependent on some inputs, so the
/// arguments are canonically ordered first; the result is exactly symmetric.
pub fn sequence_matcher_ratio(a: &str, b: &str) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let mut positions: BTreeMap<char, Vec<usize>> = BTreeMap::new();
    for (j, &c) in b.iter().enumerate() {
        positions.entry(c).or_default().push(j);
    }
    let mut matched = 0usize;
    let mut stack = vec![(0usize, a.len(), 0usize, b.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        let (i, j, size) = longest_match(&a, &positions, alo, ahi, blo, bhi);
        if size > 0 {
            matched += size;
            stack.push((alo, i, blo, j));
            stack.push((i + size, ahi, j + size, bhi));
        }
    }
    2.0 * matched as f64 / total as f64
}

/// Longest block with `a[i..i+size] == b[j..j+size]` inside the given
/// windows. Strictly-greater comparison keeps the earliest block in `a`,
/// then the earliest in `b`.
fn longest_match(
    a: &[char],
    positions: &BTreeMap<char, Vec<usize>>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let (mut besti, mut bestj, mut bestsize) = (alo, blo, 0usize);
    let mut run_lengths: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, ch) in a.iter().enumerate().take(ahi).skip(alo) {
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        if let Some(js) = positions.get(ch) {
            for &j in js {
                if j < blo {
                    continue;
                }
                if j >= bhi {
                    break;
                }
                let k = if j > blo {
                    run_lengths.get(&(j - 1)).copied().unwrap_or(0) + 1
                } else {
                    1
                };
                next.insert(j, k);
                if k > bestsize {
                    besti = i + 1 - k;
                    bestj = j + 1 - k;
                    bestsize = k;
                }
            }
        }
        run_lengths = next;
    }
    (besti, bestj, bestsize)
}

/// Jaccard index of two token sets. Both empty yields 1.0; exactly one empty
/// yields 0.0.
pub fn jaccard_index(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

/// Hybrid similarity of two already-normalized values.
pub fn normalized_sim(a: &NormalizedValue, b: &NormalizedValue) -> f64 {
    let char_level = sequence_matcher_ratio(&a.text, &b.text);
    let token_level = jaccard_index(&a.tokens, &b.tokens);
    char_level.max(token_level)
}

/// The two compared basic entities carry different roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleMismatch {
    pub left: Role,
    pub right: Role,
}

impl fmt::Display for RoleMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "role mismatch: {} vs {}", self.left, self.right)
    }
}

impl core::error::Error for RoleMismatch {}

/// Hybrid similarity of two basic entities sharing a role: both values are
/// normalized for the role, then scored as
/// `max(sequence_matcher_ratio, jaccard_index)`.
pub fn basic_entity_sim(e1: &BasicEntity, e2: &BasicEntity) -> Result<f64, RoleMismatch> {
    if e1.role != e2.role {
        return Err(RoleMismatch {
            left: e1.role,
            right: e2.role,
        });
    }
    let a = normalize_text(&e1.value, e1.role);
    let b = normalize_text(&e2.value, e2.role);
    Ok(normalized_sim(&a, &b))
}
