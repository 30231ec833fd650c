use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::casing::{fold_lowercase, parse_count, Casing};
use super::{Lemma, RuleError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Replace `strip_prefix` leading and `strip_suffix` trailing characters.
    Affix {
        strip_prefix: usize,
        prefix_insert: String,
        strip_suffix: usize,
        suffix_insert: String,
    },
    /// Ignore the form and emit a fixed lowercase string.
    Absolute { replacement: String },
}

/// A deterministic form-to-lemma transformation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EditRule {
    pub kind: RuleKind,
    pub casing: Casing,
}

impl EditRule {
    pub fn affix(
        strip_prefix: usize,
        prefix_insert: &str,
        strip_suffix: usize,
        suffix_insert: &str,
        casing: Casing,
    ) -> Self {
        EditRule {
            kind: RuleKind::Affix {
                strip_prefix,
                prefix_insert: prefix_insert.to_owned(),
                strip_suffix,
                suffix_insert: suffix_insert.to_owned(),
            },
            casing,
        }
    }

    pub fn absolute(replacement: &str, casing: Casing) -> Self {
        EditRule {
            kind: RuleKind::Absolute {
                replacement: replacement.to_owned(),
            },
            casing,
        }
    }

    /// The rule mapping every lowercase form to itself.
    pub fn identity() -> Self {
        Self::affix(0, "", 0, "", Casing::AllLower)
    }

    pub fn induce(form: &str, lemma: &Lemma) -> Self {
        induce_rule(form, lemma)
    }

    pub fn apply(&self, form: &str) -> Result<String, RuleError> {
        apply_rule(self, form)
    }

    /// Canonical single-line encoding.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            RuleKind::Affix {
                strip_prefix,
                prefix_insert,
                strip_suffix,
                suffix_insert,
            } => {
                out.push_str("a|");
                out.push_str(&strip_prefix.to_string());
                out.push('|');
                escape_into(prefix_insert, &mut out);
                out.push('|');
                out.push_str(&strip_suffix.to_string());
                out.push('|');
                escape_into(suffix_insert, &mut out);
            }
            RuleKind::Absolute { replacement } => {
                out.push_str("x|");
                escape_into(replacement, &mut out);
            }
        }
        out.push('|');
        self.casing.encode(&mut out);
        out
    }

    /// Exact inverse of [`EditRule::encode`]; rejects non-canonical input.
    pub fn decode(text: &str) -> Result<Self, RuleError> {
        let fail = |reason: String| RuleError::ParseError {
            input: text.to_owned(),
            reason,
        };
        let fields = split_escaped(text).map_err(fail)?;
        let rule = match fields.first().map(String::as_str) {
            Some("a") if fields.len() == 6 => EditRule {
                kind: RuleKind::Affix {
                    strip_prefix: parse_count(&fields[1]).map_err(fail)?,
                    prefix_insert: fields[2].clone(),
                    strip_suffix: parse_count(&fields[3]).map_err(fail)?,
                    suffix_insert: fields[4].clone(),
                },
                casing: Casing::decode(&fields[5]).map_err(fail)?,
            },
            Some("x") if fields.len() == 3 => EditRule {
                kind: RuleKind::Absolute {
                    replacement: fields[1].clone(),
                },
                casing: Casing::decode(&fields[2]).map_err(fail)?,
            },
            _ => return Err(fail("unknown rule kind or wrong field count".into())),
        };
        Ok(rule)
    }
}

impl fmt::Display for EditRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl FromStr for EditRule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EditRule::decode(s)
    }
}

impl TryFrom<String> for EditRule {
    type Error = RuleError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        EditRule::decode(&value)
    }
}

impl From<EditRule> for String {
    fn from(value: EditRule) -> Self {
        value.encode()
    }
}

fn escape_into(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

fn split_escaped(text: &str) -> Result<Vec<String>, String> {
    let mut fields = vec![String::new()];
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '|' => fields.push(String::new()),
            '\\' => {
                let decoded = match chars.next() {
                    Some('\\') => '\\',
                    Some('|') => '|',
                    Some('t') => '\t',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    other => return Err(format!("bad escape {other:?}")),
                };
                fields.last_mut().unwrap().push(decoded);
            }
            '\t' | '\n' | '\r' => return Err("raw control character".into()),
            c => fields.last_mut().unwrap().push(c),
        }
    }
    Ok(fields)
}

/// Longest common substring of `a` and `b` as `(start_a, start_b, len)`.
/// Ties go to the smallest start in `a`, then the smallest start in `b`.
fn longest_common_block(a: &[char], b: &[char]) -> (usize, usize, usize) {
    let mut best = (0, 0, 0);
    // prev[j + 1] = length of the common suffix of a[..i] and b[..=j]
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 0..a.len() {
        for j in 0..b.len() {
            cur[j + 1] = if a[i] == b[j] { prev[j] + 1 } else { 0 };
            let len = cur[j + 1];
            if len == 0 {
                continue;
            }
            let (sa, sb) = (i + 1 - len, j + 1 - len);
            let better = len > best.2 || (len == best.2 && (sa, sb) < (best.0, best.1));
            if better {
                best = (sa, sb, len);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Induces the rule turning `form` into `lemma.raw()`.
pub fn induce_rule(form: &str, lemma: &Lemma) -> EditRule {
    let f: Vec<char> = fold_lowercase(form).chars().collect();
    let lowered = fold_lowercase(lemma.raw());
    let l: Vec<char> = lowered.chars().collect();
    let casing = Casing::detect(lemma.raw());
    let (sf, sl, len) = longest_common_block(&f, &l);
    if len == 0 {
        return EditRule {
            kind: RuleKind::Absolute {
                replacement: lowered,
            },
            casing,
        };
    }
    EditRule {
        kind: RuleKind::Affix {
            strip_prefix: sf,
            prefix_insert: l[..sl].iter().collect(),
            strip_suffix: f.len() - (sf + len),
            suffix_insert: l[sl + len..].iter().collect(),
        },
        casing,
    }
}

pub fn apply_rule(rule: &EditRule, form: &str) -> Result<String, RuleError> {
    let lowered = match &rule.kind {
        RuleKind::Absolute { replacement } => replacement.clone(),
        RuleKind::Affix {
            strip_prefix,
            prefix_insert,
            strip_suffix,
            suffix_insert,
        } => {
            let f: Vec<char> = fold_lowercase(form).chars().collect();
            let strip = strip_prefix + strip_suffix;
            if strip > f.len() {
                return Err(RuleError::RuleNotApplicable {
                    strip,
                    len: f.len(),
                });
            }
            let mut out = String::with_capacity(form.len() + suffix_insert.len());
            out.push_str(prefix_insert);
            out.extend(&f[*strip_prefix..f.len() - strip_suffix]);
            out.push_str(suffix_insert);
            out
        }
    };
    Ok(rule.casing.apply(&lowered))
}
