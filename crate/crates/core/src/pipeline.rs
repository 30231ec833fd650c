//! End-to-end annotation and two-stage self-training.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conllu_io::Sentence;
use crate::morphdict::MorphDict;
use crate::rescore::{
    candidate_table, decode_sentence, rescore_sentence, CandidateTable, RescoreError,
    RescoredChoice,
};
use crate::tagger::{
    corpus_fingerprint, ExternalSentence, Inventories, TaggerError, TaggerModel,
    TokenDistributions, TrainConfig, TrainingMetadata,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Rescore(#[from] RescoreError),
    #[error("{sentences} sentences but distributions for {distributions}")]
    SentenceCountMismatch {
        sentences: usize,
        distributions: usize,
    },
    #[error("cannot start thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs `f` over `items` on `threads` workers, preserving order.
fn par_map<T: Sync, U: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>, PipelineError> {
    if threads <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn decode(
    forms: &[&str],
    dists: &[TokenDistributions],
    inventories: &Inventories,
    dict: Option<&MorphDict>,
) -> Result<Vec<RescoredChoice>, RescoreError> {
    match dict {
        Some(d) => rescore_sentence(d, forms, dists, inventories),
        None => decode_sentence(forms, dists, inventories),
    }
}

fn fill(sentence: &Sentence, choices: Vec<RescoredChoice>) -> Sentence {
    let mut out = sentence.clone();
    for (token, choice) in out.tokens.iter_mut().zip(choices) {
        token.lemma = Some(choice.lemma);
        token.xpos = Some(choice.tag);
    }
    out
}

/// Tags and lemmatizes every token, rescoring with `dict` when given.
///
/// Existing LEMMA and XPOS values are overwritten; every other column is kept.
pub fn annotate(
    model: &TaggerModel,
    dict: Option<&MorphDict>,
    sentences: &[Sentence],
    threads: usize,
) -> Result<Vec<Sentence>, PipelineError> {
    let results = par_map(sentences, threads, |s| {
        let forms: Vec<&str> = s.forms().collect();
        let dists = model.predict(&forms);
        decode(&forms, &dists, model.inventories(), dict).map(|c| fill(s, c))
    })?;
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

/// Same as [`annotate`] with distributions computed elsewhere.
pub fn annotate_with_distributions(
    sentences: &[Sentence],
    distributions: &[Vec<TokenDistributions>],
    inventories: &Inventories,
    dict: Option<&MorphDict>,
) -> Result<Vec<Sentence>, PipelineError> {
    if sentences.len() != distributions.len() {
        return Err(PipelineError::SentenceCountMismatch {
            sentences: sentences.len(),
            distributions: distributions.len(),
        });
    }
    sentences
        .iter()
        .zip(distributions)
        .map(|(s, d)| {
            let forms: Vec<&str> = s.forms().collect();
            Ok(fill(s, decode(&forms, d, inventories, dict)?))
        })
        .collect()
}

/// Builds sentences from an external distributions file and annotates them.
pub fn annotate_external(
    external: &[ExternalSentence],
    inventories: &Inventories,
    dict: Option<&MorphDict>,
) -> Result<Vec<Sentence>, PipelineError> {
    let sentences: Vec<Sentence> = external
        .iter()
        .map(|e| Sentence::from_forms(&e.forms))
        .collect();
    let dists: Vec<Vec<TokenDistributions>> =
        external.iter().map(|e| e.distributions.clone()).collect();
    annotate_with_distributions(&sentences, &dists, inventories, dict)
}

/// Per-token rescoring tables, one per token in reading order.
pub fn candidate_tables(
    model: &TaggerModel,
    dict: &MorphDict,
    sentences: &[Sentence],
) -> Vec<CandidateTable> {
    let mut out = Vec::new();
    for s in sentences {
        let forms: Vec<&str> = s.forms().collect();
        let dists = model.predict(&forms);
        for (form, d) in forms.iter().zip(&dists) {
            out.push(candidate_table(dict, form, d, model.inventories()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusRecord {
    pub fingerprint: String,
    pub sentences: usize,
    pub tokens: usize,
}

impl CorpusRecord {
    fn of(corpus: &[Sentence]) -> Self {
        CorpusRecord {
            fingerprint: corpus_fingerprint(corpus),
            sentences: corpus.len(),
            tokens: corpus.iter().map(Sentence::len).sum(),
        }
    }
}

/// What went into each self-training stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: TrainConfig,
    pub dictionary: Option<String>,
    pub gold: CorpusRecord,
    /// The raw part after stage-1 annotation.
    pub annotated_raw: CorpusRecord,
    pub stage1: TrainingMetadata,
    pub stage2: TrainingMetadata,
}

impl Provenance {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("provenance serializes")
    }
}

pub struct SelfTrainOutput {
    pub stage1: TaggerModel,
    pub stage2: TaggerModel,
    pub provenance: Provenance,
}

/// Trains on `gold`, annotates `raw` with that model (rescored when `dict`
/// is given), then retrains on gold followed by the annotated raw part.
///
/// Annotations already present in `raw` are ignored. With an empty raw part
/// the second stage sees exactly the gold corpus and reproduces stage one.
pub fn self_train(
    gold: &[Sentence],
    raw: &[Sentence],
    config: &TrainConfig,
    dict: Option<&MorphDict>,
    threads: usize,
) -> Result<SelfTrainOutput, PipelineError> {
    let stage1 = TaggerModel::train(gold, config)?;
    let annotated = annotate(&stage1, dict, raw, threads)?;
    let mut union = gold.to_vec();
    union.extend(annotated.iter().cloned());
    let stage2 = TaggerModel::train(&union, config)?;
    let provenance = Provenance {
        config: *config,
        dictionary: dict.map(|d| d.source().to_owned()),
        gold: CorpusRecord::of(gold),
        annotated_raw: CorpusRecord::of(&annotated),
        stage1: stage1.metadata().clone(),
        stage2: stage2.metadata().clone(),
    };
    Ok(SelfTrainOutput {
        stage1,
        stage2,
        provenance,
    })
}
