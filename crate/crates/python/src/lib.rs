//! Python bindings. The extension module is importable as `morphtag`.

use morphtag::conllu_io::{parse_conllu, tokenize, write_conllu, Abbreviations};
use morphtag::evalx::{self, Section};
use morphtag::pipeline::annotate;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sentences(conllu: &str) -> PyResult<Vec<morphtag::Sentence>> {
    parse_conllu(conllu).map_err(value_error)
}

/// A lemma with an optional `-N` sense suffix.
#[pyclass(frozen, eq, skip_from_py_object, module = "morphtag")]
#[derive(Clone, PartialEq)]
struct Lemma(morphtag::Lemma);

#[pymethods]
impl Lemma {
    #[new]
    fn new(raw: &str) -> PyResult<Self> {
        morphtag::Lemma::parse(raw).map(Lemma).map_err(value_error)
    }

    /// Parses a dictionary lemma, dropping `_` comments.
    #[staticmethod]
    fn from_dictionary(raw: &str) -> PyResult<Self> {
        morphtag::strip_comments(raw)
            .map(Lemma)
            .map_err(value_error)
    }

    #[getter]
    fn raw(&self) -> &str {
        self.0.raw()
    }

    #[getter]
    fn proper(&self) -> &str {
        self.0.proper()
    }

    #[getter]
    fn sense(&self) -> Option<u32> {
        self.0.sense()
    }

    fn __str__(&self) -> &str {
        self.0.raw()
    }

    fn __repr__(&self) -> String {
        format!("Lemma({:?})", self.0.raw())
    }
}

/// A form-to-lemma edit rule.
#[pyclass(frozen, eq, skip_from_py_object, hash, module = "morphtag")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct EditRule(morphtag::EditRule);

#[pymethods]
impl EditRule {
    /// The shortest rule turning `form` into `lemma`.
    #[staticmethod]
    fn induce(form: &str, lemma: &str) -> PyResult<Self> {
        let lemma = morphtag::Lemma::parse(lemma).map_err(value_error)?;
        Ok(EditRule(morphtag::induce_rule(form, &lemma)))
    }

    #[staticmethod]
    fn decode(text: &str) -> PyResult<Self> {
        morphtag::EditRule::decode(text)
            .map(EditRule)
            .map_err(value_error)
    }

    fn encode(&self) -> String {
        self.0.encode()
    }

    fn apply(&self, form: &str) -> PyResult<String> {
        morphtag::apply_rule(&self.0, form).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("EditRule({:?})", self.0.encode())
    }
}

/// Form-indexed morphological dictionary.
#[pyclass(frozen, module = "morphtag")]
struct MorphDict(morphtag::MorphDict);

#[pymethods]
impl MorphDict {
    /// Loads a TSV dictionary; `order` is `form-lemma-tag` or `lemma-tag-form`.
    #[staticmethod]
    #[pyo3(signature = (path, order = "form-lemma-tag"))]
    fn load(path: &str, order: &str) -> PyResult<Self> {
        let order = order.parse().map_err(PyValueError::new_err)?;
        morphtag::MorphDict::load(path, order)
            .map(MorphDict)
            .map_err(value_error)
    }

    /// Builds a dictionary from `(form, lemma, tag)` triples.
    #[staticmethod]
    #[pyo3(signature = (entries, source = "memory"))]
    fn from_entries(entries: Vec<(String, String, String)>, source: &str) -> PyResult<Self> {
        let mut parsed = Vec::with_capacity(entries.len());
        for (form, lemma, tag) in entries {
            let lemma = morphtag::strip_comments(&lemma).map_err(value_error)?;
            let tag = morphtag::Tag::new(&tag).map_err(value_error)?;
            parsed.push((form, lemma, tag));
        }
        Ok(MorphDict(morphtag::MorphDict::from_entries(source, parsed)))
    }

    /// The `(lemma, tag)` analyses of a form, sorted by tag then lemma.
    fn lookup(&self, form: &str) -> Vec<(String, String)> {
        self.0
            .lookup(form)
            .iter()
            .map(|a| (a.lemma.raw().to_owned(), a.tag.as_str().to_owned()))
            .collect()
    }

    fn ambiguity(&self, form: &str) -> usize {
        self.0.ambiguity(form)
    }

    fn contains(&self, form: &str, lemma: &str, tag: &str) -> PyResult<bool> {
        let tag = morphtag::Tag::new(tag).map_err(value_error)?;
        Ok(self.0.contains(form, lemma, &tag))
    }

    #[getter]
    fn entry_count(&self) -> usize {
        self.0.entry_count()
    }

    #[getter]
    fn form_count(&self) -> usize {
        self.0.form_count()
    }

    fn __len__(&self) -> usize {
        self.0.entry_count()
    }
}

/// Averaged perceptron predicting tag and edit-rule distributions.
#[pyclass(frozen, module = "morphtag")]
struct TaggerModel(morphtag::TaggerModel);

#[pymethods]
impl TaggerModel {
    /// Trains on annotated CoNLL-U text.
    #[staticmethod]
    #[pyo3(signature = (conllu, epochs = 20, seed = 42, temperature = 1.0))]
    fn train(
        py: Python<'_>,
        conllu: &str,
        epochs: u32,
        seed: u64,
        temperature: f64,
    ) -> PyResult<Self> {
        let corpus = sentences(conllu)?;
        let config = morphtag::TrainConfig {
            epochs,
            seed,
            temperature,
        };
        py.detach(|| morphtag::TaggerModel::train(&corpus, &config))
            .map(TaggerModel)
            .map_err(value_error)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        morphtag::TaggerModel::load(path)
            .map(TaggerModel)
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_bytes(bytes: &[u8]) -> PyResult<Self> {
        morphtag::TaggerModel::from_bytes(bytes)
            .map(TaggerModel)
            .map_err(value_error)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(value_error)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes()
    }

    #[getter]
    fn tags(&self) -> Vec<String> {
        let inv = self.0.inventories();
        inv.tags.iter().map(|t| t.as_str().to_owned()).collect()
    }

    #[getter]
    fn rules(&self) -> Vec<EditRule> {
        let inv = self.0.inventories();
        inv.rules.iter().cloned().map(EditRule).collect()
    }

    /// Per-token `(tag_probs, rule_probs)`, indexed like `tags` and `rules`.
    fn predict(&self, forms: Vec<String>) -> Vec<(Vec<f64>, Vec<f64>)> {
        let forms: Vec<&str> = forms.iter().map(String::as_str).collect();
        self.0
            .predict(&forms)
            .into_iter()
            .map(|d| (d.tag_probs, d.rule_probs))
            .collect()
    }

    /// Annotates CoNLL-U text, rescoring with `dictionary` when given.
    #[pyo3(signature = (conllu, dictionary = None, threads = 1))]
    fn tag(
        &self,
        py: Python<'_>,
        conllu: &str,
        dictionary: Option<&MorphDict>,
        threads: usize,
    ) -> PyResult<String> {
        let input = sentences(conllu)?;
        let dict = dictionary.map(|d| &d.0);
        let out = py
            .detach(|| annotate(&self.0, dict, &input, threads))
            .map_err(value_error)?;
        Ok(write_conllu(&out))
    }

    /// Tokenizes and annotates plain text.
    #[pyo3(signature = (text, dictionary = None))]
    fn tag_text(&self, text: &str, dictionary: Option<&MorphDict>) -> PyResult<String> {
        let input = tokenize(text, &Abbreviations::default());
        let out = annotate(&self.0, dictionary.map(|d| &d.0), &input, 1).map_err(value_error)?;
        Ok(write_conllu(&out))
    }

    /// Rescored choice for each form: `(lemma, tag, constrained, fallback)`.
    fn rescore(
        &self,
        dictionary: &MorphDict,
        forms: Vec<String>,
    ) -> PyResult<Vec<(String, String, bool, Option<String>)>> {
        let forms: Vec<&str> = forms.iter().map(String::as_str).collect();
        let dists = self.0.predict(&forms);
        let choices =
            morphtag::rescore_sentence(&dictionary.0, &forms, &dists, self.0.inventories())
                .map_err(value_error)?;
        Ok(choices
            .into_iter()
            .map(|c| {
                (
                    c.lemma,
                    c.tag.as_str().to_owned(),
                    c.constrained,
                    c.fallback_used.map(|f| format!("{f:?}")),
                )
            })
            .collect())
    }
}

/// Splits plain text into sentences and tokens, returned as CoNLL-U.
#[pyfunction]
fn tokenize_text(text: &str) -> String {
    write_conllu(&tokenize(text, &Abbreviations::default()))
}

/// Parses and rewrites CoNLL-U text.
#[pyfunction]
fn normalize_conllu(conllu: &str) -> PyResult<String> {
    Ok(write_conllu(&sentences(conllu)?))
}

/// Lemma and POS accuracy, in percent.
#[pyfunction]
fn accuracy(gold: &str, system: &str) -> PyResult<(f64, f64)> {
    let (gold, system) = (sentences(gold)?, sentences(system)?);
    let lemma = evalx::accuracy(&gold, &system, evalx::Field::Lemma).map_err(value_error)?;
    let pos = evalx::accuracy(&gold, &system, evalx::Field::Pos).map_err(value_error)?;
    Ok((lemma, pos))
}

/// Full evaluation report as JSON.
#[pyfunction]
#[pyo3(signature = (gold, system, dictionary = None))]
fn evaluate(gold: &str, system: &str, dictionary: Option<&MorphDict>) -> PyResult<String> {
    let (gold, system) = (sentences(gold)?, sentences(system)?);
    let section = Section {
        name: "all",
        gold: &gold,
        system: &system,
    };
    let report =
        evalx::EvalReport::build(&[section], dictionary.map(|d| &d.0)).map_err(value_error)?;
    Ok(report.to_json())
}

#[pyfunction]
fn error_reduction(baseline: f64, new: f64) -> PyResult<f64> {
    evalx::error_reduction(baseline, new).map_err(value_error)
}

#[pyfunction]
fn macro_average(accuracies: Vec<f64>) -> PyResult<f64> {
    evalx::macro_average(&accuracies).map_err(value_error)
}

#[pymodule(name = "morphtag")]
fn morphtag_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lemma>()?;
    m.add_class::<EditRule>()?;
    m.add_class::<MorphDict>()?;
    m.add_class::<TaggerModel>()?;
    m.add_function(wrap_pyfunction!(tokenize_text, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_conllu, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(error_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(macro_average, m)?)?;
    Ok(())
}
