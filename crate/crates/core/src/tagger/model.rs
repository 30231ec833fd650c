use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::sentence_features;
use super::perceptron::AveragedPerceptron;
use super::{softmax, Inventories, TaggerError, TokenDistributions};
use crate::binio::{self, BinError};
use crate::conllu_io::Sentence;
use crate::lemma_rules::{induce_rule, strip_comments, EditRule, Tag};

const MAGIC: &[u8; 8] = b"MTAGMODL";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: u32,
    pub seed: u64,
    /// Softmax temperature used by `predict`.
    pub temperature: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            seed: 42,
            temperature: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs: u32,
    pub seed: u64,
    pub temperature: f64,
    pub corpus_fingerprint: String,
    pub sentences: u64,
    pub tokens: u64,
}

/// Averaged perceptron with a tag head and an edit-rule head over shared
/// features.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    inventories: Inventories,
    features: Vec<String>,
    feature_ids: HashMap<String, u32>,
    tag_weights: Vec<Vec<(u32, f64)>>,
    rule_weights: Vec<Vec<(u32, f64)>>,
    metadata: TrainingMetadata,
}

struct Example {
    features: Vec<u32>,
    tag: usize,
    rule: usize,
}

/// A gold token: form, comment-stripped lemma and tag.
fn gold_token(
    sentence: &Sentence,
    s: usize,
    t: usize,
) -> Result<(String, crate::Lemma, Tag), TaggerError> {
    let token = &sentence.tokens[t];
    let bad = |message: &str| TaggerError::CorpusFormatError {
        sentence: s + 1,
        token: t + 1,
        message: message.to_owned(),
    };
    let lemma = token.lemma.as_deref().ok_or_else(|| bad("missing lemma"))?;
    let lemma = strip_comments(lemma).map_err(|e| bad(&e.to_string()))?;
    let tag = token.xpos.clone().ok_or_else(|| bad("missing XPOS tag"))?;
    Ok((token.form.clone(), lemma, tag))
}

/// SHA-256 over the `(form, lemma, tag)` content of a corpus.
pub fn corpus_fingerprint(corpus: &[Sentence]) -> String {
    let mut hasher = Sha256::new();
    for sentence in corpus {
        for token in &sentence.tokens {
            hasher.update(token.form.as_bytes());
            hasher.update(b"\t");
            hasher.update(token.lemma.as_deref().unwrap_or("_").as_bytes());
            hasher.update(b"\t");
            hasher.update(token.xpos.as_ref().map_or("_", Tag::as_str).as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

impl TaggerModel {
    pub fn train(corpus: &[Sentence], config: &TrainConfig) -> Result<Self, TaggerError> {
        if corpus.iter().all(|s| s.tokens.is_empty()) {
            return Err(TaggerError::EmptyCorpus);
        }

        let mut golds = Vec::with_capacity(corpus.len());
        for (s, sentence) in corpus.iter().enumerate() {
            let mut tokens = Vec::with_capacity(sentence.len());
            for t in 0..sentence.len() {
                let (form, lemma, tag) = gold_token(sentence, s, t)?;
                let rule = induce_rule(&form, &lemma);
                tokens.push((form, tag, rule));
            }
            golds.push(tokens);
        }
        let inventories = Inventories::new(
            golds.iter().flatten().map(|(_, t, _)| t.clone()),
            golds.iter().flatten().map(|(_, _, r)| r.clone()),
        );

        let mut feature_ids: HashMap<String, u32> = HashMap::new();
        let mut features: Vec<String> = Vec::new();
        let mut examples: Vec<Vec<Example>> = Vec::with_capacity(golds.len());
        for tokens in &golds {
            let forms: Vec<&str> = tokens.iter().map(|(f, _, _)| f.as_str()).collect();
            let feats = sentence_features(&forms);
            let sentence_examples = feats
                .into_iter()
                .zip(tokens)
                .map(|(fs, (_, tag, rule))| Example {
                    features: fs
                        .into_iter()
                        .map(|f| {
                            *feature_ids.entry(f).or_insert_with_key(|k| {
                                features.push(k.clone());
                                (features.len() - 1) as u32
                            })
                        })
                        .collect(),
                    tag: inventories.tag_index(tag).unwrap(),
                    rule: inventories.rule_index(rule).unwrap(),
                })
                .collect();
            examples.push(sentence_examples);
        }

        let mut tag_head = AveragedPerceptron::new(inventories.tags.len());
        let mut rule_head = AveragedPerceptron::new(inventories.rules.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &s in &order {
                for ex in &examples[s] {
                    tag_head.tick();
                    rule_head.tick();
                    let guess = tag_head.predict(&ex.features);
                    tag_head.update(&ex.features, ex.tag, guess);
                    let guess = rule_head.predict(&ex.features);
                    rule_head.update(&ex.features, ex.rule, guess);
                }
            }
        }

        let tokens = golds.iter().map(Vec::len).sum::<usize>() as u64;
        let metadata = TrainingMetadata {
            epochs: config.epochs,
            seed: config.seed,
            temperature: config.temperature,
            corpus_fingerprint: corpus_fingerprint(corpus),
            sentences: corpus.len() as u64,
            tokens,
        };
        Ok(Self::from_parts(
            inventories,
            features,
            tag_head.averaged(),
            rule_head.averaged(),
            metadata,
        ))
    }

    /// Re-indexes features in sorted order and drops features with no weight,
    /// so that the model has one canonical form.
    fn from_parts(
        inventories: Inventories,
        features: Vec<String>,
        mut tag_weights: Vec<Vec<(u32, f64)>>,
        mut rule_weights: Vec<Vec<(u32, f64)>>,
        metadata: TrainingMetadata,
    ) -> Self {
        tag_weights.resize(features.len(), Vec::new());
        rule_weights.resize(features.len(), Vec::new());
        let mut rows: Vec<(String, Vec<(u32, f64)>, Vec<(u32, f64)>)> = features
            .into_iter()
            .zip(tag_weights)
            .zip(rule_weights)
            .map(|((f, t), r)| (f, t, r))
            .filter(|(_, t, r)| !t.is_empty() || !r.is_empty())
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut model = TaggerModel {
            inventories,
            features: Vec::with_capacity(rows.len()),
            feature_ids: HashMap::with_capacity(rows.len()),
            tag_weights: Vec::with_capacity(rows.len()),
            rule_weights: Vec::with_capacity(rows.len()),
            metadata,
        };
        for (i, (f, t, r)) in rows.into_iter().enumerate() {
            model.feature_ids.insert(f.clone(), i as u32);
            model.features.push(f);
            model.tag_weights.push(t);
            model.rule_weights.push(r);
        }
        model
    }

    pub fn inventories(&self) -> &Inventories {
        &self.inventories
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    /// Raw perceptron scores `(tag_scores, rule_scores)` for every token.
    pub fn scores(&self, forms: &[&str]) -> Vec<(Vec<f64>, Vec<f64>)> {
        sentence_features(forms)
            .into_iter()
            .map(|feats| {
                let mut tag_scores = vec![0.0; self.inventories.tags.len()];
                let mut rule_scores = vec![0.0; self.inventories.rules.len()];
                for f in feats {
                    let Some(&id) = self.feature_ids.get(&f) else {
                        continue;
                    };
                    for &(c, w) in &self.tag_weights[id as usize] {
                        tag_scores[c as usize] += w;
                    }
                    for &(c, w) in &self.rule_weights[id as usize] {
                        rule_scores[c as usize] += w;
                    }
                }
                (tag_scores, rule_scores)
            })
            .collect()
    }

    pub fn predict(&self, forms: &[&str]) -> Vec<TokenDistributions> {
        let t = self.metadata.temperature;
        self.scores(forms)
            .into_iter()
            .map(|(tags, rules)| TokenDistributions {
                tag_probs: softmax(&tags, t),
                rule_probs: softmax(&rules, t),
            })
            .collect()
    }

    pub fn predict_sentence(&self, sentence: &Sentence) -> Vec<TokenDistributions> {
        let forms: Vec<&str> = sentence.forms().collect();
        self.predict(&forms)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.metadata.temperature = temperature;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.write(Vec::new())
            .expect("writing to memory cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TaggerError> {
        let out = BufWriter::new(File::create(path)?);
        self.write(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W) -> io::Result<W> {
        let mut w = binio::Writer::new(out, MAGIC, VERSION)?;
        let m = &self.metadata;
        w.u32(m.epochs)?;
        w.u64(m.seed)?;
        w.f64(m.temperature)?;
        w.str(&m.corpus_fingerprint)?;
        w.u64(m.sentences)?;
        w.u64(m.tokens)?;
        w.len(self.inventories.tags.len())?;
        for tag in &self.inventories.tags {
            w.str(tag.as_str())?;
        }
        w.len(self.inventories.rules.len())?;
        for rule in &self.inventories.rules {
            w.str(&rule.encode())?;
        }
        w.len(self.features.len())?;
        for (i, f) in self.features.iter().enumerate() {
            w.str(f)?;
            for row in [&self.tag_weights[i], &self.rule_weights[i]] {
                w.len(row.len())?;
                for &(c, weight) in row {
                    w.u32(c)?;
                    w.f64(weight)?;
                }
            }
        }
        w.finish()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaggerError> {
        Self::read(BufReader::new(File::open(path)?))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TaggerError> {
        Self::read(bytes)
    }

    pub fn read<R: Read>(input: R) -> Result<Self, TaggerError> {
        let corrupt = |m: String| TaggerError::Binary(BinError::Corrupt(m));
        let mut r = binio::Reader::new(input, MAGIC, VERSION, "model")?;
        let metadata = TrainingMetadata {
            epochs: r.u32()?,
            seed: r.u64()?,
            temperature: r.f64()?,
            corpus_fingerprint: r.str()?,
            sentences: r.u64()?,
            tokens: r.u64()?,
        };
        let mut tags = Vec::new();
        for _ in 0..r.len()? {
            tags.push(Tag::new(&r.str()?).map_err(|e| corrupt(e.to_string()))?);
        }
        let mut rules = Vec::new();
        for _ in 0..r.len()? {
            rules.push(EditRule::decode(&r.str()?).map_err(|e| corrupt(e.to_string()))?);
        }
        let inventories = Inventories::new(tags.iter().cloned(), rules.iter().cloned());
        if !inventories.tags.iter().eq(&tags) || !inventories.rules.iter().eq(&rules) {
            return Err(corrupt("inventories are not canonical".into()));
        }
        let n_features = r.len()?;
        let mut features = Vec::with_capacity(n_features);
        let mut tag_weights = Vec::with_capacity(n_features);
        let mut rule_weights = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            features.push(r.str()?);
            for (weights, classes) in [
                (&mut tag_weights, tags.len()),
                (&mut rule_weights, rules.len()),
            ] {
                let n = r.len()?;
                let mut row = Vec::with_capacity(n.min(classes));
                for _ in 0..n {
                    let c = r.u32()?;
                    if c as usize >= classes {
                        return Err(corrupt(format!("class index {c} out of range")));
                    }
                    row.push((c, r.f64()?));
                }
                weights.push(row);
            }
        }
        r.finish()?;
        Ok(Self::from_parts(
            inventories,
            features,
            tag_weights,
            rule_weights,
            metadata,
        ))
    }
}
