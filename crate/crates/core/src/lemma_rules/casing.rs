use std::ops::Range;

use serde::{Deserialize, Serialize};

/// How to restore letter case after a rule has produced a lowercase lemma.
///
/// Explicit ranges are half-open character positions, sorted, non-empty,
/// and neither overlapping nor adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Casing {
    AllLower,
    FirstUpperRestLower,
    AllUpper,
    Explicit(Vec<Range<usize>>),
}

fn single(mut it: impl Iterator<Item = char>) -> Option<char> {
    let c = it.next()?;
    it.next().is_none().then_some(c)
}

/// Lowercases `c` only when uppercasing the result gives `c` back, so that
/// every change can be undone character by character.
pub(crate) fn fold_char(c: char) -> char {
    match single(c.to_lowercase()) {
        Some(l) if l != c && single(l.to_uppercase()) == Some(c) => l,
        _ => c,
    }
}

pub(crate) fn fold_lowercase(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

fn is_upper(c: char) -> bool {
    fold_char(c) != c
}

/// The uppercase counterpart of `c` if `c` is a reversible lowercase letter.
fn raise(c: char) -> Option<char> {
    match single(c.to_uppercase()) {
        Some(u) if u != c && fold_char(u) == c => Some(u),
        _ => None,
    }
}

fn is_lower(c: char) -> bool {
    raise(c).is_some()
}

impl Casing {
    /// Describes the letter case of `text`.
    pub fn detect(text: &str) -> Casing {
        let mut upper = 0usize;
        let mut lower = 0usize;
        let mut first_cased_is_upper = None;
        for c in text.chars() {
            let (u, l) = (is_upper(c), is_lower(c));
            if u {
                upper += 1;
            } else if l {
                lower += 1;
            }
            if first_cased_is_upper.is_none() && (u || l) {
                first_cased_is_upper = Some(u);
            }
        }
        if upper == 0 {
            Casing::AllLower
        } else if upper == 1 && first_cased_is_upper == Some(true) {
            Casing::FirstUpperRestLower
        } else if lower == 0 {
            Casing::AllUpper
        } else {
            let mut ranges: Vec<Range<usize>> = Vec::new();
            for (i, c) in text.chars().enumerate() {
                if !is_upper(c) {
                    continue;
                }
                match ranges.last_mut() {
                    Some(last) if last.end == i => last.end = i + 1,
                    _ => ranges.push(i..i + 1),
                }
            }
            Casing::Explicit(ranges)
        }
    }

    /// Applies the casing to an already lowercased string.
    pub fn apply(&self, lowered: &str) -> String {
        match self {
            Casing::AllLower => lowered.to_owned(),
            Casing::AllUpper => lowered.chars().map(|c| raise(c).unwrap_or(c)).collect(),
            Casing::FirstUpperRestLower => {
                let mut done = false;
                lowered
                    .chars()
                    .map(|c| {
                        if done {
                            return c;
                        }
                        match raise(c) {
                            Some(u) => {
                                done = true;
                                u
                            }
                            None => c,
                        }
                    })
                    .collect()
            }
            Casing::Explicit(ranges) => lowered
                .chars()
                .enumerate()
                .map(|(i, c)| {
                    if ranges.iter().any(|r| r.contains(&i)) {
                        raise(c).unwrap_or(c)
                    } else {
                        c
                    }
                })
                .collect(),
        }
    }

    pub(crate) fn encode(&self, out: &mut String) {
        match self {
            Casing::AllLower => out.push('l'),
            Casing::FirstUpperRestLower => out.push('f'),
            Casing::AllUpper => out.push('u'),
            Casing::Explicit(ranges) => {
                out.push('e');
                for (i, r) in ranges.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!("{}-{}", r.start, r.end));
                }
            }
        }
    }

    pub(crate) fn decode(text: &str) -> Result<Casing, String> {
        match text {
            "l" => return Ok(Casing::AllLower),
            "f" => return Ok(Casing::FirstUpperRestLower),
            "u" => return Ok(Casing::AllUpper),
            _ => {}
        }
        let body = text
            .strip_prefix('e')
            .ok_or_else(|| format!("unknown casing {text:?}"))?;
        if body.is_empty() {
            return Err("explicit casing without ranges".into());
        }
        let mut ranges: Vec<Range<usize>> = Vec::new();
        for part in body.split(',') {
            let (start, end) = part
                .split_once('-')
                .ok_or_else(|| format!("bad casing range {part:?}"))?;
            let start = parse_count(start)?;
            let end = parse_count(end)?;
            if start >= end {
                return Err(format!("empty casing range {part:?}"));
            }
            if ranges.last().is_some_and(|last| last.end >= start) {
                return Err("casing ranges must be sorted and separated".into());
            }
            ranges.push(start..end);
        }
        Ok(Casing::Explicit(ranges))
    }
}

/// Parses a decimal count in canonical form (no sign, no leading zeros).
pub(super) fn parse_count(text: &str) -> Result<usize, String> {
    let canonical = !text.is_empty()
        && text.bytes().all(|b| b.is_ascii_digit())
        && (text == "0" || !text.starts_with('0'));
    if !canonical {
        return Err(format!("bad count {text:?}"));
    }
    text.parse()
        .map_err(|_| format!("count out of range {text:?}"))
}
