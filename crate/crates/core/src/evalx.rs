//! Accuracy, error reduction and error analysis over aligned corpora.
//!
//! Lemmas are compared after stripping technical comments, so
//! `pes_^(zvíře)` matches `pes`, while sense numbers are significant:
//! `jak-1` does not match `jak-2`. POS accuracy compares the full positional
//! tag in the XPOS column.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::conllu_io::{Sentence, Token};
use crate::lemma_rules::{fold_lowercase, strip_comments, Lemma};
use crate::morphdict::MorphDict;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("sentence {sentence}, token {token}: {message}")]
    AlignmentError {
        sentence: usize,
        token: usize,
        message: String,
    },
    #[error("baseline accuracy is 100%, error reduction is undefined")]
    DivisionByZero,
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("{0} is not a percentage")]
    InvalidPercentage(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Lemma,
    Pos,
}

/// Comment-stripped lemma used for comparison.
fn lemma_key(token: &Token) -> Option<String> {
    let raw = token.lemma.as_deref()?;
    Some(match strip_comments(raw) {
        Ok(l) => l.raw().to_owned(),
        Err(_) => raw.to_owned(),
    })
}

fn matches(gold: &Token, system: &Token, field: Field) -> bool {
    match field {
        Field::Lemma => {
            let g = lemma_key(gold);
            g.is_some() && g == lemma_key(system)
        }
        Field::Pos => gold.xpos.is_some() && gold.xpos == system.xpos,
    }
}

/// Pairs up tokens of several corpora, checking they share segmentation and
/// forms.
fn align<'a>(
    gold: &'a [Sentence],
    others: &[&'a [Sentence]],
) -> Result<Vec<(&'a Token, Vec<&'a Token>)>, EvalError> {
    let mut out = Vec::new();
    for other in others {
        if other.len() != gold.len() {
            return Err(EvalError::AlignmentError {
                sentence: gold.len().min(other.len()) + 1,
                token: 0,
                message: format!("{} gold sentences but {}", gold.len(), other.len()),
            });
        }
    }
    for (s, g) in gold.iter().enumerate() {
        for other in others {
            let o = &other[s];
            if o.tokens.len() != g.tokens.len() {
                return Err(EvalError::AlignmentError {
                    sentence: s + 1,
                    token: 0,
                    message: format!("{} gold tokens but {}", g.tokens.len(), o.tokens.len()),
                });
            }
        }
        for (t, gt) in g.tokens.iter().enumerate() {
            let mut row = Vec::with_capacity(others.len());
            for other in others {
                let ot = &other[s].tokens[t];
                if ot.form != gt.form {
                    return Err(EvalError::AlignmentError {
                        sentence: s + 1,
                        token: t + 1,
                        message: format!("form {:?} does not match gold {:?}", ot.form, gt.form),
                    });
                }
                row.push(ot);
            }
            out.push((gt, row));
        }
    }
    Ok(out)
}

fn percent(correct: usize, total: usize) -> f64 {
    100.0 * correct as f64 / total as f64
}

/// Percentage of tokens whose lemma or tag matches the gold standard.
pub fn accuracy(gold: &[Sentence], system: &[Sentence], field: Field) -> Result<f64, EvalError> {
    let rows = align(gold, &[system])?;
    if rows.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let correct = rows.iter().filter(|(g, s)| matches(g, s[0], field)).count();
    Ok(percent(correct, rows.len()))
}

fn check_percentage(p: f64) -> Result<f64, EvalError> {
    if (0.0..=100.0).contains(&p) {
        Ok(p)
    } else {
        Err(EvalError::InvalidPercentage(p))
    }
}

/// Relative decrease of the error rate, in percent.
pub fn error_reduction(baseline_acc: f64, new_acc: f64) -> Result<f64, EvalError> {
    let baseline_err = 100.0 - check_percentage(baseline_acc)?;
    let new_err = 100.0 - check_percentage(new_acc)?;
    if baseline_err == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(100.0 * (baseline_err - new_err) / baseline_err)
}

/// Unweighted mean of per-section accuracies.
pub fn macro_average(accuracies: &[f64]) -> Result<f64, EvalError> {
    if accuracies.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(accuracies.iter().sum::<f64>() / accuracies.len() as f64)
}

pub const BUCKETS: usize = 10;

/// Bucket index for an ambiguity level: 0..=8 map to themselves, the rest
/// to the "9+" bucket.
pub fn bucket_of(ambiguity: usize) -> usize {
    ambiguity.min(BUCKETS - 1)
}

pub fn bucket_label(bucket: usize) -> String {
    if bucket + 1 == BUCKETS {
        format!("{bucket}+")
    } else {
        bucket.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketRow {
    pub bucket: String,
    pub tokens: usize,
    /// Share of all tokens, in percent.
    pub weight: f64,
    /// `None` for empty buckets.
    pub pos_acc: Option<f64>,
    pub lemma_acc: Option<f64>,
}

/// Micro accuracies split by the number of dictionary analyses of the form.
pub fn bucket_by_ambiguity(
    dict: &MorphDict,
    gold: &[Sentence],
    system: &[Sentence],
) -> Result<Vec<BucketRow>, EvalError> {
    let rows = align(gold, &[system])?;
    let mut counts = [(0usize, 0usize, 0usize); BUCKETS];
    for (g, s) in &rows {
        let c = &mut counts[bucket_of(dict.ambiguity(&g.form))];
        c.0 += 1;
        c.1 += matches(g, s[0], Field::Pos) as usize;
        c.2 += matches(g, s[0], Field::Lemma) as usize;
    }
    let total = rows.len();
    Ok(counts
        .iter()
        .enumerate()
        .map(|(b, &(n, pos, lemma))| BucketRow {
            bucket: bucket_label(b),
            tokens: n,
            weight: if total == 0 { 0.0 } else { percent(n, total) },
            pos_acc: (n > 0).then(|| percent(pos, n)),
            lemma_acc: (n > 0).then(|| percent(lemma, n)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ErrorCategory {
    /// The predicted lemma is not a lemma of any dictionary entry.
    NonLemma,
    /// Same lemma proper, different sense number.
    SenseError,
    /// Equal up to casing.
    CasingError,
    OtherLemmaError,
    /// The tag is wrong; counted independently of the lemma categories.
    TagError,
}

/// Which of the exclusive lemma categories applies, in priority order.
pub fn classify_lemma_error(dict: &MorphDict, gold: &str, system: &str) -> ErrorCategory {
    if !dict.is_known_lemma(system) {
        return ErrorCategory::NonLemma;
    }
    if let (Ok(g), Ok(s)) = (Lemma::parse(gold), Lemma::parse(system)) {
        if g.proper() == s.proper() && g.sense() != s.sense() {
            return ErrorCategory::SenseError;
        }
    }
    if fold_lowercase(gold) == fold_lowercase(system) {
        return ErrorCategory::CasingError;
    }
    ErrorCategory::OtherLemmaError
}

/// Kind of change needed to turn the system lemma into the gold one,
/// regardless of whether the system lemma is in the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Correction {
    Sense,
    Casing,
    Other,
}

fn correction_kind(gold: &str, system: &str) -> Correction {
    match (Lemma::parse(gold), Lemma::parse(system)) {
        (Ok(g), Ok(s)) if g.proper() == s.proper() && g.sense() != s.sense() => Correction::Sense,
        _ if fold_lowercase(gold) == fold_lowercase(system) => Correction::Casing,
        _ => Correction::Other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectionRow {
    pub form: String,
    pub system_lemma: String,
    pub gold_lemma: String,
    pub frequency: usize,
    pub is_non_lemma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorAnalysis {
    pub tokens: usize,
    pub lemma_errors: usize,
    pub tag_errors: usize,
    /// Exclusive lemma categories plus the independent tag error count.
    pub categories: BTreeMap<ErrorCategory, usize>,
    /// Sense / casing / other split of all lemma errors, in-dictionary or not.
    pub corrections_by_kind: BTreeMap<String, usize>,
    /// Most frequent first, then by form.
    pub corrections: Vec<CorrectionRow>,
}

pub fn categorize_errors(
    dict: &MorphDict,
    gold: &[Sentence],
    system: &[Sentence],
) -> Result<ErrorAnalysis, EvalError> {
    let rows = align(gold, &[system])?;
    let mut categories: BTreeMap<ErrorCategory, usize> = [
        ErrorCategory::NonLemma,
        ErrorCategory::SenseError,
        ErrorCategory::CasingError,
        ErrorCategory::OtherLemmaError,
        ErrorCategory::TagError,
    ]
    .into_iter()
    .map(|c| (c, 0))
    .collect();
    let mut kinds: BTreeMap<String, usize> = ["sense", "casing", "other"]
        .into_iter()
        .map(|k| (k.to_owned(), 0))
        .collect();
    let mut table: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    let mut lemma_errors = 0;
    let mut tag_errors = 0;
    for (g, s) in &rows {
        let s = s[0];
        if !matches(g, s, Field::Pos) {
            tag_errors += 1;
            *categories.get_mut(&ErrorCategory::TagError).unwrap() += 1;
        }
        if matches(g, s, Field::Lemma) {
            continue;
        }
        lemma_errors += 1;
        let gold_lemma = lemma_key(g).unwrap_or_default();
        let system_lemma = lemma_key(s).unwrap_or_default();
        *categories
            .get_mut(&classify_lemma_error(dict, &gold_lemma, &system_lemma))
            .unwrap() += 1;
        let kind = match correction_kind(&gold_lemma, &system_lemma) {
            Correction::Sense => "sense",
            Correction::Casing => "casing",
            Correction::Other => "other",
        };
        *kinds.get_mut(kind).unwrap() += 1;
        *table
            .entry((g.form.clone(), system_lemma, gold_lemma))
            .or_default() += 1;
    }
    let mut corrections: Vec<CorrectionRow> = table
        .into_iter()
        .map(
            |((form, system_lemma, gold_lemma), frequency)| CorrectionRow {
                is_non_lemma: !dict.is_known_lemma(&system_lemma),
                form,
                system_lemma,
                gold_lemma,
                frequency,
            },
        )
        .collect();
    // Stable sort keeps the (form, system, gold) order within equal counts.
    corrections.sort_by(|a, b| b.frequency.cmp(&a.frequency));
    Ok(ErrorAnalysis {
        tokens: rows.len(),
        lemma_errors,
        tag_errors,
        categories,
        corrections_by_kind: kinds,
        corrections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SystemDiff {
    /// Wrong in `a`, right in `b`.
    pub fixed: usize,
    /// Right in `a`, wrong in `b`.
    pub introduced: usize,
    pub both_wrong: usize,
}

pub fn diff_systems(
    gold: &[Sentence],
    system_a: &[Sentence],
    system_b: &[Sentence],
    field: Field,
) -> Result<SystemDiff, EvalError> {
    let rows = align(gold, &[system_a, system_b])?;
    let mut diff = SystemDiff {
        fixed: 0,
        introduced: 0,
        both_wrong: 0,
    };
    for (g, s) in &rows {
        match (matches(g, s[0], field), matches(g, s[1], field)) {
            (false, true) => diff.fixed += 1,
            (true, false) => diff.introduced += 1,
            (false, false) => diff.both_wrong += 1,
            (true, true) => {}
        }
    }
    Ok(diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub lemma_acc: f64,
    pub pos_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionScores {
    pub lemma_acc: f64,
    pub pos_acc: f64,
    pub token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_section: BTreeMap<String, SectionScores>,
    pub macro_avg: Scores,
    /// Error reduction of this system relative to each named baseline.
    pub error_reductions: BTreeMap<String, Scores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambiguity_buckets: Option<Vec<BucketRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_categories: Option<ErrorAnalysis>,
}

/// One evaluated section: gold and system annotations of the same text.
pub struct Section<'a> {
    pub name: &'a str,
    pub gold: &'a [Sentence],
    pub system: &'a [Sentence],
}

impl EvalReport {
    /// Scores every section; with a dictionary, also pools all sections for
    /// the ambiguity and error-category breakdowns.
    pub fn build(sections: &[Section], dict: Option<&MorphDict>) -> Result<Self, EvalError> {
        if sections.is_empty() {
            return Err(EvalError::EmptyInput);
        }
        let mut per_section = BTreeMap::new();
        let mut lemma = Vec::new();
        let mut pos = Vec::new();
        for s in sections {
            let scores = SectionScores {
                lemma_acc: accuracy(s.gold, s.system, Field::Lemma)?,
                pos_acc: accuracy(s.gold, s.system, Field::Pos)?,
                token_count: s.gold.iter().map(Sentence::len).sum(),
            };
            lemma.push(scores.lemma_acc);
            pos.push(scores.pos_acc);
            per_section.insert(s.name.to_owned(), scores);
        }
        let (mut buckets, mut categories) = (None, None);
        if let Some(dict) = dict {
            let gold: Vec<Sentence> = sections
                .iter()
                .flat_map(|s| s.gold.iter().cloned())
                .collect();
            let system: Vec<Sentence> = sections
                .iter()
                .flat_map(|s| s.system.iter().cloned())
                .collect();
            buckets = Some(bucket_by_ambiguity(dict, &gold, &system)?);
            categories = Some(categorize_errors(dict, &gold, &system)?);
        }
        Ok(EvalReport {
            per_section,
            macro_avg: Scores {
                lemma_acc: macro_average(&lemma)?,
                pos_acc: macro_average(&pos)?,
            },
            error_reductions: BTreeMap::new(),
            ambiguity_buckets: buckets,
            error_categories: categories,
        })
    }

    /// Records the macro-averaged error reduction against `baseline`.
    pub fn add_baseline(&mut self, name: &str, baseline: &EvalReport) -> Result<(), EvalError> {
        let scores = Scores {
            lemma_acc: error_reduction(baseline.macro_avg.lemma_acc, self.macro_avg.lemma_acc)?,
            pos_acc: error_reduction(baseline.macro_avg.pos_acc, self.macro_avg.pos_acc)?,
        };
        self.error_reductions.insert(name.to_owned(), scores);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>8} {:>8} {:>8}",
            "section", "lemma", "pos", "tokens"
        );
        for (name, s) in &self.per_section {
            let _ = writeln!(
                out,
                "{:<20} {:>8.2} {:>8.2} {:>8}",
                name, s.lemma_acc, s.pos_acc, s.token_count
            );
        }
        let _ = writeln!(
            out,
            "{:<20} {:>8.2} {:>8.2}",
            "macro avg", self.macro_avg.lemma_acc, self.macro_avg.pos_acc
        );
        for (name, r) in &self.error_reductions {
            let _ = writeln!(
                out,
                "{:<20} {:>7.1}% {:>7.1}%",
                format!("vs {name}"),
                r.lemma_acc,
                r.pos_acc
            );
        }
        if let Some(buckets) = &self.ambiguity_buckets {
            let _ = writeln!(
                out,
                "\n{:<8} {:>8} {:>8} {:>8}",
                "analyses", "weight", "pos", "lemma"
            );
            let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.2}"));
            for b in buckets {
                let _ = writeln!(
                    out,
                    "{:<8} {:>8.2} {:>8} {:>8}",
                    b.bucket,
                    b.weight,
                    fmt(b.pos_acc),
                    fmt(b.lemma_acc)
                );
            }
        }
        if let Some(e) = &self.error_categories {
            let _ = writeln!(
                out,
                "\nlemma errors {}, tag errors {}",
                e.lemma_errors, e.tag_errors
            );
            for (c, n) in &e.categories {
                let _ = writeln!(out, "  {c:?}: {n}");
            }
            for row in e.corrections.iter().take(20) {
                let star = if row.is_non_lemma { "*" } else { "" };
                let _ = writeln!(
                    out,
                    "  {} {}{} -> {} ({})",
                    row.form, row.system_lemma, star, row.gold_lemma, row.frequency
                );
            }
        }
        out
    }
}
