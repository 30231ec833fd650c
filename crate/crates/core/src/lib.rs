//! Morphological tagging and lemmatization with dictionary rescoring.
//!
//! A tagger (the built-in averaged perceptron or any external model that
//! writes per-token distributions) proposes probability distributions over
//! tags and lemma edit rules. At inference time the morphological dictionary
//! prunes every `(tag, rule)` pair that does not yield a known analysis of
//! the form, and the surviving pair with the largest probability product wins.

pub mod binio;
pub mod conllu_io;
pub mod evalx;
pub mod lemma_rules;
pub mod morphdict;
pub mod pipeline;
pub mod rescore;
pub mod tagger;

pub use conllu_io::{parse_conllu, read_conllu, tokenize, write_conllu, Sentence, Token};
pub use evalx::{EvalReport, Field};
pub use lemma_rules::{apply_rule, induce_rule, strip_comments, Casing, EditRule, Lemma, Tag};
pub use morphdict::{Analysis, ColumnOrder, MorphDict};
pub use pipeline::{annotate, self_train};
pub use rescore::{rescore_sentence, rescore_token, valid_pairs, Fallback, RescoredChoice};
pub use tagger::{Inventories, TaggerModel, TokenDistributions, TrainConfig};
