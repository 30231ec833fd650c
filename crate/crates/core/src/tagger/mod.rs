//! Per-token probability distributions over tags and edit rules.
//!
//! Distributions come either from the built-in averaged perceptron
//! ([`TaggerModel`]) or from a JSON-lines file written by any external model
//! ([`load_external_distributions`]).

mod external;
mod features;
mod model;
mod perceptron;

use indexmap::IndexSet;
use thiserror::Error;

use crate::binio::BinError;
use crate::conllu_io::ConlluError;
use crate::lemma_rules::{EditRule, Tag};

pub use external::{
    load_external_distributions, parse_external_distributions, scan_inventories, ExternalSentence,
};
pub use features::token_features;
pub use model::{corpus_fingerprint, TaggerModel, TrainConfig, TrainingMetadata};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("sentence {sentence}, token {token}: {message}")]
    CorpusFormatError {
        sentence: usize,
        token: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Binary(#[from] BinError),
    #[error(transparent)]
    Conllu(#[from] ConlluError),
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: cannot decode rule {rule:?}")]
    UnknownRuleEncoding { line: usize, rule: String },
    #[error("line {line}: negative probability")]
    NegativeProbability { line: usize },
    #[error("line {line}: {item:?} is not in the model inventory")]
    OutOfInventory { line: usize, item: String },
    #[error("line {line}: probabilities sum to zero")]
    ZeroMass { line: usize },
}

/// The fixed output spaces of a model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Inventories {
    pub tags: IndexSet<Tag>,
    pub rules: IndexSet<EditRule>,
}

impl Inventories {
    /// Builds inventories in canonical order: tags sorted, rules sorted by
    /// their encoding.
    pub fn new(
        tags: impl IntoIterator<Item = Tag>,
        rules: impl IntoIterator<Item = EditRule>,
    ) -> Self {
        let mut tags: Vec<Tag> = tags.into_iter().collect();
        tags.sort();
        tags.dedup();
        let mut rules: Vec<(String, EditRule)> =
            rules.into_iter().map(|r| (r.encode(), r)).collect();
        rules.sort_by(|a, b| a.0.cmp(&b.0));
        rules.dedup_by(|a, b| a.0 == b.0);
        Inventories {
            tags: tags.into_iter().collect(),
            rules: rules.into_iter().map(|(_, r)| r).collect(),
        }
    }

    pub fn tag_index(&self, tag: &Tag) -> Option<usize> {
        self.tags.get_index_of(tag)
    }

    pub fn rule_index(&self, rule: &EditRule) -> Option<usize> {
        self.rules.get_index_of(rule)
    }
}

/// Probabilities indexed by inventory position.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenDistributions {
    pub tag_probs: Vec<f64>,
    pub rule_probs: Vec<f64>,
}

impl TokenDistributions {
    pub const TOLERANCE: f64 = 1e-6;

    /// Checks the shape against `inventories`, that every probability is in
    /// `[0, 1]` and that each head sums to one.
    pub fn is_valid(&self, inventories: &Inventories) -> bool {
        let head_ok = |p: &[f64], n: usize| {
            p.len() == n
                && p.iter().all(|x| (0.0..=1.0).contains(x))
                && (p.iter().sum::<f64>() - 1.0).abs() <= Self::TOLERANCE
        };
        head_ok(&self.tag_probs, inventories.tags.len())
            && head_ok(&self.rule_probs, inventories.rules.len())
    }

    pub fn best_tag(&self) -> Option<usize> {
        argmax(&self.tag_probs)
    }

    pub fn best_rule(&self) -> Option<usize> {
        argmax(&self.rule_probs)
    }
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Numerically stable softmax with temperature.
pub fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    if scores.is_empty() {
        return Vec::new();
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores
        .iter()
        .map(|s| ((s - max) / temperature).exp())
        .collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
