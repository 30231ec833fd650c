use std::collections::BTreeMap;
use std::path::PathBuf;

use morphtag::conllu_io::{read_conllu, write_conllu};
use morphtag::evalx::{accuracy, bucket_by_ambiguity, Field};
use morphtag::pipeline::{annotate, self_train};
use morphtag::{
    apply_rule, induce_rule, strip_comments, ColumnOrder, Lemma, MorphDict, Sentence, Tag,
    TaggerModel, TrainConfig,
};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn dict() -> MorphDict {
    MorphDict::load(data("dict.tsv"), ColumnOrder::FormLemmaTag).unwrap()
}

fn train() -> Vec<Sentence> {
    read_conllu(data("train.conllu")).unwrap()
}

#[test]
fn dictionary_fixture_loads() {
    let d = dict();
    assert_eq!(d.entry_count(), 443);
    // ženy: sg genitive, pl nominative, accusative and vocative
    assert_eq!(d.ambiguity("ženy"), 4);
    assert_eq!(d.ambiguity("robot"), 0);
    assert!(d.is_known_lemma("stát-1"));
    assert!(!d.is_known_lemma("stát-1_^(státní_útvar)"));
}

#[test]
fn rule_pairs_roundtrip() {
    let text = std::fs::read_to_string(data("rule_pairs.tsv")).unwrap();
    let mut n = 0;
    for line in text.lines() {
        let (form, lemma) = line.split_once('\t').unwrap();
        let rule = induce_rule(form, &Lemma::parse(lemma).unwrap());
        assert_eq!(apply_rule(&rule, form).unwrap(), lemma, "{form} -> {lemma}");
        n += 1;
    }
    assert!(n >= 1000);
}

#[test]
fn tagger_fits_training_data() {
    let corpus = train();
    let model = TaggerModel::train(&corpus, &TrainConfig::default()).unwrap();
    let out = annotate(&model, None, &corpus, 1).unwrap();
    let pos = accuracy(&corpus, &out, Field::Pos).unwrap();
    let lemma = accuracy(&corpus, &out, Field::Lemma).unwrap();
    assert!(pos >= 99.0, "pos {pos}");
    assert!(lemma >= 99.0, "lemma {lemma}");
}

#[test]
fn dictionary_helps_on_dev() {
    let model = TaggerModel::train(&train(), &TrainConfig::default()).unwrap();
    let dev = read_conllu(data("dev.conllu")).unwrap();
    let d = dict();
    let plain = annotate(&model, None, &dev, 1).unwrap();
    let rescored = annotate(&model, Some(&d), &dev, 1).unwrap();
    let before = accuracy(&dev, &plain, Field::Lemma).unwrap();
    let after = accuracy(&dev, &rescored, Field::Lemma).unwrap();
    assert!(after >= before, "{before} -> {after}");
    let buckets = bucket_by_ambiguity(&d, &dev, &rescored).unwrap();
    assert!(buckets[0].tokens > 0, "fixture has OOV tokens");
}

#[test]
fn single_analysis_forms_are_always_right() {
    let model = TaggerModel::train(&train(), &TrainConfig::default()).unwrap();
    let dev = read_conllu(data("dev.conllu")).unwrap();
    // One analysis per form, taken from the gold data itself.
    let mut seen: BTreeMap<String, Option<(String, String)>> = BTreeMap::new();
    for t in dev.iter().flat_map(|s| &s.tokens) {
        let a = (
            t.lemma.clone().unwrap(),
            t.xpos.as_ref().unwrap().to_string(),
        );
        seen.entry(t.form.clone())
            .and_modify(|v| {
                if v.as_ref() != Some(&a) {
                    *v = None;
                }
            })
            .or_insert(Some(a));
    }
    let single = MorphDict::from_entries(
        "single",
        seen.iter().filter_map(|(f, a)| {
            let (l, t) = a.as_ref()?;
            Some((f.clone(), strip_comments(l).unwrap(), Tag::new(t).unwrap()))
        }),
    );
    let inv = model.inventories();
    let usable: Vec<Sentence> = dev
        .iter()
        .filter(|s| {
            s.tokens.iter().all(|t| {
                let a = single.lookup(&t.form);
                a.len() == 1
                    && inv.tag_index(&a[0].tag).is_some()
                    && inv.rule_index(&induce_rule(&t.form, &a[0].lemma)).is_some()
            })
        })
        .cloned()
        .collect();
    assert!(usable.len() >= 10, "only {} usable sentences", usable.len());
    let out = annotate(&model, Some(&single), &usable, 1).unwrap();
    assert_eq!(accuracy(&usable, &out, Field::Pos).unwrap(), 100.0);
    assert_eq!(accuracy(&usable, &out, Field::Lemma).unwrap(), 100.0);
}

#[test]
fn roundtrip_fixture_is_idempotent() {
    let text = std::fs::read_to_string(data("roundtrip.conllu")).unwrap();
    let sentences = read_conllu(data("roundtrip.conllu")).unwrap();
    assert_eq!(sentences.len(), 50);
    assert_eq!(write_conllu(&sentences), text);
}

#[test]
fn self_training_on_fixtures() {
    let raw = read_conllu(data("raw.conllu")).unwrap();
    let dev = read_conllu(data("dev.conllu")).unwrap();
    let d = dict();
    let config = TrainConfig::default();
    let out = self_train(&train(), &raw, &config, Some(&d), 2).unwrap();
    let acc = |m: &TaggerModel| {
        accuracy(&dev, &annotate(m, Some(&d), &dev, 1).unwrap(), Field::Pos).unwrap()
    };
    let (a1, a2) = (acc(&out.stage1), acc(&out.stage2));
    assert!(a2 >= a1 - 0.5, "stage 1 {a1}, stage 2 {a2}");
    assert_eq!(out.provenance.stage2.sentences, 260);
}
