//! JSON-lines ingestion of distributions produced by an external model.
//!
//! One JSON object per token:
//!
//! ```text
//! {"form": "psa", "tags": [["NNMS2-----A----", 0.7], ...], "rules": [["a|0||1|es|l", 0.9], ...]}
//! ```
//!
//! A blank line ends a sentence. Inventory items not listed get probability
//! zero; listed probabilities are renormalized to sum to one.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{ExternalError, Inventories, TokenDistributions};
use crate::lemma_rules::{EditRule, Tag};

#[derive(Debug, Deserialize)]
struct Record {
    form: String,
    tags: Vec<(String, f64)>,
    rules: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSentence {
    pub forms: Vec<String>,
    pub distributions: Vec<TokenDistributions>,
}

pub fn load_external_distributions(
    path: impl AsRef<Path>,
    inventories: &Inventories,
) -> Result<Vec<ExternalSentence>, ExternalError> {
    let file = BufReader::new(File::open(path)?);
    parse_external_distributions(file, inventories)
}

pub fn parse_external_distributions<R: BufRead>(
    input: R,
    inventories: &Inventories,
) -> Result<Vec<ExternalSentence>, ExternalError> {
    let mut sentences = Vec::new();
    let mut current = ExternalSentence {
        forms: Vec::new(),
        distributions: Vec::new(),
    };
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ExternalError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            if !current.forms.is_empty() {
                sentences.push(std::mem::replace(
                    &mut current,
                    ExternalSentence {
                        forms: Vec::new(),
                        distributions: Vec::new(),
                    },
                ));
            }
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| ExternalError::ParseError {
                line: line_no,
                message: e.to_string(),
            })?;
        let mut tag_probs = vec![0.0; inventories.tags.len()];
        for (tag, p) in &record.tags {
            let idx = Tag::new(tag)
                .ok()
                .and_then(|t| inventories.tag_index(&t))
                .ok_or_else(|| ExternalError::OutOfInventory {
                    line: line_no,
                    item: tag.clone(),
                })?;
            tag_probs[idx] += checked(*p, line_no)?;
        }
        let mut rule_probs = vec![0.0; inventories.rules.len()];
        for (rule, p) in &record.rules {
            let decoded =
                EditRule::decode(rule).map_err(|_| ExternalError::UnknownRuleEncoding {
                    line: line_no,
                    rule: rule.clone(),
                })?;
            let idx =
                inventories
                    .rule_index(&decoded)
                    .ok_or_else(|| ExternalError::OutOfInventory {
                        line: line_no,
                        item: rule.clone(),
                    })?;
            rule_probs[idx] += checked(*p, line_no)?;
        }
        normalize(&mut tag_probs, line_no)?;
        normalize(&mut rule_probs, line_no)?;
        current.forms.push(record.form);
        current.distributions.push(TokenDistributions {
            tag_probs,
            rule_probs,
        });
    }
    if !current.forms.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

fn checked(p: f64, line: usize) -> Result<f64, ExternalError> {
    if p < 0.0 {
        return Err(ExternalError::NegativeProbability { line });
    }
    if !p.is_finite() {
        return Err(ExternalError::ParseError {
            line,
            message: "probability is not finite".into(),
        });
    }
    Ok(p)
}

fn normalize(probs: &mut [f64], line: usize) -> Result<(), ExternalError> {
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(ExternalError::ZeroMass { line });
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(())
}

/// Collects the tag and rule inventories used by an external file.
pub fn scan_inventories<R: BufRead>(input: R) -> Result<Inventories, ExternalError> {
    let mut tags = Vec::new();
    let mut rules = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| ExternalError::ParseError {
                line: line_no,
                message: e.to_string(),
            })?;
        for (tag, _) in record.tags {
            tags.push(Tag::new(&tag).map_err(|e| ExternalError::ParseError {
                line: line_no,
                message: e.to_string(),
            })?);
        }
        for (rule, _) in record.rules {
            rules.push(EditRule::decode(&rule).map_err(|_| {
                ExternalError::UnknownRuleEncoding {
                    line: line_no,
                    rule: rule.clone(),
                }
            })?);
        }
    }
    Ok(Inventories::new(tags, rules))
}

impl Inventories {
    /// Inventories consisting of everything an external file mentions.
    pub fn from_external(path: impl AsRef<Path>) -> Result<Self, ExternalError> {
        scan_inventories(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma_rules::Casing;

    fn inventories() -> Inventories {
        let t = |s: &str| Tag::new(s).unwrap();
        Inventories::new(
            [t("A"), t("B"), t("C")],
            [
                EditRule::identity(),
                EditRule::affix(0, "", 1, "", Casing::AllLower),
            ],
        )
    }

    fn parse(text: &str) -> Result<Vec<ExternalSentence>, ExternalError> {
        parse_external_distributions(text.as_bytes(), &inventories())
    }

    #[test]
    fn direct_parse() {
        let s = parse(r#"{"form":"x","tags":[["A",0.6],["B",0.4]],"rules":[["a|0||0||l",1.0]]}"#)
            .unwrap();
        assert_eq!(s.len(), 1);
        let d = &s[0].distributions[0];
        assert_eq!(d.tag_probs, vec![0.6, 0.4, 0.0]);
        assert!(d.is_valid(&inventories()));
    }

    #[test]
    fn renormalizes() {
        let s = parse(
            r#"{"form":"x","tags":[["A",3],["B",1]],"rules":[["a|0||0||l",2],["a|0||1||l",2]]}"#,
        )
        .unwrap();
        let d = &s[0].distributions[0];
        assert_eq!(d.tag_probs, vec![0.75, 0.25, 0.0]);
        assert_eq!(d.rule_probs, vec![0.5, 0.5]);
    }

    #[test]
    fn sentence_breaks() {
        let tok = r#"{"form":"x","tags":[["A",1]],"rules":[["a|0||0||l",1]]}"#;
        let text = format!("{tok}\n{tok}\n\n\n{tok}\n");
        let s = parse(&text).unwrap();
        assert_eq!(
            s.iter().map(|s| s.forms.len()).collect::<Vec<_>>(),
            vec![2, 1]
        );
    }

    #[test]
    fn errors() {
        let neg = r#"{"form":"x","tags":[["A",-0.1]],"rules":[["a|0||0||l",1]]}"#;
        assert!(matches!(
            parse(neg),
            Err(ExternalError::NegativeProbability { line: 1 })
        ));
        let bad_rule = r#"{"form":"x","tags":[["A",1]],"rules":[["zzz",1]]}"#;
        assert!(matches!(
            parse(bad_rule),
            Err(ExternalError::UnknownRuleEncoding { line: 1, .. })
        ));
        let unknown = r#"{"form":"x","tags":[["Q",1]],"rules":[["a|0||0||l",1]]}"#;
        assert!(matches!(
            parse(unknown),
            Err(ExternalError::OutOfInventory { line: 1, .. })
        ));
        let zero = r#"{"form":"x","tags":[["A",0]],"rules":[["a|0||0||l",1]]}"#;
        assert!(matches!(
            parse(zero),
            Err(ExternalError::ZeroMass { line: 1 })
        ));
        assert!(matches!(
            parse("{not json"),
            Err(ExternalError::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn scanning() {
        let text = r#"{"form":"x","tags":[["B",1],["A",1]],"rules":[["a|0||1||l",1]]}"#;
        let inv = scan_inventories(text.as_bytes()).unwrap();
        assert_eq!(inv.tags.len(), 2);
        assert_eq!(inv.tags[0].as_str(), "A");
        assert_eq!(inv.rules.len(), 1);
    }
}
