//! Structured PDT lemmas, positional tags, and the character edit rules that
//! turn a surface form into its lemma.
//!
//! An [`EditRule`] is induced from a `(form, lemma)` pair by anchoring on the
//! longest common substring of the lowercased strings and recording how the
//! material before and after that block must be replaced. Casing of the lemma
//! is stored separately, so one rule covers `Praze -> Praha` and `praze -> praha`.
//!
//! Rules have a canonical single-line text encoding (see [`EditRule::encode`]):
//!
//! ```text
//! a|<strip_prefix>|<prefix_insert>|<strip_suffix>|<suffix_insert>|<casing>
//! x|<replacement>|<casing>
//! ```
//!
//! where `<casing>` is `l` (all lower), `f` (first cased letter upper, rest
//! lower), `u` (all upper) or `e` followed by comma separated half-open
//! `start-end` ranges of uppercase character positions (`e0-1,4-6`).
//! Inside strings, `\`, `|`, TAB, LF and CR are escaped as `\\`, `\|`, `\t`,
//! `\n` and `\r`.

mod casing;
mod lemma;
mod rule;

pub use casing::Casing;
pub use lemma::{strip_comments, Lemma, Tag};
pub use rule::{apply_rule, induce_rule, EditRule, RuleKind};

pub(crate) use casing::fold_lowercase;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaError {
    #[error("lemma is empty after stripping comments")]
    EmptyLemma,
    #[error("lemma {0:?} contains comment markup")]
    CommentMarkup(String),
    #[error("invalid tag {0:?}")]
    InvalidTag(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule strips {strip} characters from a {len}-character form")]
    RuleNotApplicable { strip: usize, len: usize },
    #[error("cannot parse edit rule {input:?}: {reason}")]
    ParseError { input: String, reason: String },
}
