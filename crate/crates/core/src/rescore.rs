//! Dictionary rescoring of tag and edit-rule distributions.
//!
//! For a form the dictionary does not know, the per-head argmax is used
//! unchanged. For a known form, only `(tag, rule)` pairs whose rule turns the
//! form into a lemma that the dictionary lists with that tag are allowed, and
//! the allowed pair with the largest `P(tag) * P(rule)` is selected.
//!
//! Ties on the product go to the higher tag probability, then to the earlier
//! dictionary analysis, then to the earlier rule in the inventory. When every
//! allowed pair has product zero, the pair is chosen by tag probability alone
//! (then rule probability). When no pair is allowed, the unconstrained choice
//! is kept. Neither fallback renormalizes anything: the argmax of products is
//! unaffected by scaling.

use serde::Serialize;
use thiserror::Error;

use crate::lemma_rules::{apply_rule, EditRule, Tag};
use crate::morphdict::MorphDict;
use crate::tagger::{Inventories, TokenDistributions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RescoreError {
    #[error("{forms} forms but {distributions} distributions")]
    LengthMismatch { forms: usize, distributions: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fallback {
    /// The form is in the dictionary but no inventory pair reproduces any of
    /// its analyses.
    NoValidPair,
    /// Every valid pair has probability product zero.
    AllZero,
}

/// A `(tag, rule)` combination licensed by the dictionary for one form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidPair {
    pub tag: usize,
    pub rule: usize,
    /// Position of the licensing analysis in the dictionary's ordering.
    pub analysis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescoredChoice {
    pub tag_index: usize,
    /// `None` only when no inventory rule can be applied to the form, in
    /// which case the lemma is the form itself.
    pub rule_index: Option<usize>,
    pub tag: Tag,
    pub rule: Option<EditRule>,
    pub lemma: String,
    pub score: f64,
    pub constrained: bool,
    pub fallback_used: Option<Fallback>,
}

/// All `(tag, rule)` pairs from the inventories that yield a dictionary
/// analysis of `form`, ordered by analysis, then rule.
pub fn valid_pairs(dict: &MorphDict, form: &str, inventories: &Inventories) -> Vec<ValidPair> {
    let analyses = dict.lookup(form);
    if analyses.is_empty() {
        return Vec::new();
    }
    let tag_ids: Vec<Option<usize>> = analyses
        .iter()
        .map(|a| inventories.tag_index(&a.tag))
        .collect();
    let mut pairs = Vec::new();
    for (r, rule) in inventories.rules.iter().enumerate() {
        let Ok(lemma) = apply_rule(rule, form) else {
            continue;
        };
        for (a, analysis) in analyses.iter().enumerate() {
            if let Some(t) = tag_ids[a] {
                if analysis.lemma.raw() == lemma {
                    pairs.push(ValidPair {
                        tag: t,
                        rule: r,
                        analysis: a,
                    });
                }
            }
        }
    }
    pairs.sort_by_key(|p| (p.analysis, p.rule));
    pairs
}

fn unconstrained(
    form: &str,
    dists: &TokenDistributions,
    inventories: &Inventories,
) -> (usize, Option<usize>, String) {
    let tag = dists.best_tag().expect("tag distribution is empty");
    let mut order: Vec<usize> = (0..dists.rule_probs.len()).collect();
    order.sort_by(|&a, &b| {
        dists.rule_probs[b]
            .total_cmp(&dists.rule_probs[a])
            .then(a.cmp(&b))
    });
    for r in order {
        if let Ok(lemma) = apply_rule(&inventories.rules[r], form) {
            return (tag, Some(r), lemma);
        }
    }
    (tag, None, form.to_owned())
}

fn choice(
    inventories: &Inventories,
    dists: &TokenDistributions,
    tag: usize,
    rule: Option<usize>,
    lemma: String,
    constrained: bool,
    fallback_used: Option<Fallback>,
) -> RescoredChoice {
    let rule_prob = rule.map_or(0.0, |r| dists.rule_probs[r]);
    RescoredChoice {
        tag_index: tag,
        rule_index: rule,
        tag: inventories.tags[tag].clone(),
        rule: rule.map(|r| inventories.rules[r].clone()),
        lemma,
        score: dists.tag_probs[tag] * rule_prob,
        constrained,
        fallback_used,
    }
}

/// Per-head argmax without consulting any dictionary.
pub fn decode_token(
    form: &str,
    dists: &TokenDistributions,
    inventories: &Inventories,
) -> RescoredChoice {
    let (tag, rule, lemma) = unconstrained(form, dists, inventories);
    choice(inventories, dists, tag, rule, lemma, false, None)
}

pub fn rescore_token(
    dict: &MorphDict,
    form: &str,
    dists: &TokenDistributions,
    inventories: &Inventories,
) -> RescoredChoice {
    if dict.lookup(form).is_empty() {
        return decode_token(form, dists, inventories);
    }
    let pairs = valid_pairs(dict, form, inventories);
    if pairs.is_empty() {
        let (tag, rule, lemma) = unconstrained(form, dists, inventories);
        return choice(
            inventories,
            dists,
            tag,
            rule,
            lemma,
            true,
            Some(Fallback::NoValidPair),
        );
    }

    let tp = |p: &ValidPair| dists.tag_probs[p.tag];
    let rp = |p: &ValidPair| dists.rule_probs[p.rule];
    // `pairs` is sorted by (analysis, rule), so a strict comparison keeps the
    // earliest pair among equals.
    let mut best = &pairs[0];
    for p in &pairs[1..] {
        let (a, b) = (tp(p) * rp(p), tp(best) * rp(best));
        if a > b || (a == b && tp(p) > tp(best)) {
            best = p;
        }
    }
    let mut fallback = None;
    if tp(best) * rp(best) == 0.0 {
        fallback = Some(Fallback::AllZero);
        best = &pairs[0];
        for p in &pairs[1..] {
            if (tp(p), rp(p)) > (tp(best), rp(best)) {
                best = p;
            }
        }
    }
    let lemma = dict.lookup(form)[best.analysis].lemma.raw().to_owned();
    choice(
        inventories,
        dists,
        best.tag,
        Some(best.rule),
        lemma,
        true,
        fallback,
    )
}

pub fn rescore_sentence(
    dict: &MorphDict,
    forms: &[&str],
    dists: &[TokenDistributions],
    inventories: &Inventories,
) -> Result<Vec<RescoredChoice>, RescoreError> {
    if forms.len() != dists.len() {
        return Err(RescoreError::LengthMismatch {
            forms: forms.len(),
            distributions: dists.len(),
        });
    }
    Ok(forms
        .iter()
        .zip(dists)
        .map(|(f, d)| rescore_token(dict, f, d, inventories))
        .collect())
}

pub fn decode_sentence(
    forms: &[&str],
    dists: &[TokenDistributions],
    inventories: &Inventories,
) -> Result<Vec<RescoredChoice>, RescoreError> {
    if forms.len() != dists.len() {
        return Err(RescoreError::LengthMismatch {
            forms: forms.len(),
            distributions: dists.len(),
        });
    }
    Ok(forms
        .iter()
        .zip(dists)
        .map(|(f, d)| decode_token(f, d, inventories))
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub tag: String,
    pub rule: String,
    pub lemma: String,
    pub tag_prob: f64,
    pub rule_prob: f64,
    pub product: f64,
    /// Product renormalized over the valid pairs.
    pub posterior: f64,
}

/// Debug view of the rescoring decision for one token.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateTable {
    pub form: String,
    pub ambiguity: usize,
    pub candidates: Vec<Candidate>,
    pub selected: RescoredChoice,
}

pub fn candidate_table(
    dict: &MorphDict,
    form: &str,
    dists: &TokenDistributions,
    inventories: &Inventories,
) -> CandidateTable {
    let analyses = dict.lookup(form);
    let pairs = valid_pairs(dict, form, inventories);
    let products: Vec<f64> = pairs
        .iter()
        .map(|p| dists.tag_probs[p.tag] * dists.rule_probs[p.rule])
        .collect();
    let total: f64 = products.iter().sum();
    let candidates = pairs
        .iter()
        .zip(&products)
        .map(|(p, &product)| Candidate {
            tag: inventories.tags[p.tag].to_string(),
            rule: inventories.rules[p.rule].encode(),
            lemma: analyses[p.analysis].lemma.raw().to_owned(),
            tag_prob: dists.tag_probs[p.tag],
            rule_prob: dists.rule_probs[p.rule],
            product,
            posterior: if total > 0.0 { product / total } else { 0.0 },
        })
        .collect();
    CandidateTable {
        form: form.to_owned(),
        ambiguity: analyses.len(),
        candidates,
        selected: rescore_token(dict, form, dists, inventories),
    }
}
