//! Immutable morphological dictionary: surface form to the set of
//! `(lemma, tag)` analyses it licenses.
//!
//! The text format is UTF-8 with three TAB-separated columns per line, either
//! in MorfFlex order (`lemma tag form`) or in `form lemma tag` order. Lemmas
//! are stripped of comments on load. Blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binio::{self, BinError};
use crate::lemma_rules::{fold_lowercase, strip_comments, Lemma, Tag};

const MAGIC: &[u8; 8] = b"MTAGDICT";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DictError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    FormatError { line: usize, message: String },
    #[error("line {line}: invalid UTF-8")]
    EncodingError { line: usize },
    #[error(transparent)]
    Binary(#[from] BinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ColumnOrder {
    /// `form<TAB>lemma<TAB>tag`
    #[default]
    FormLemmaTag,
    /// `lemma<TAB>tag<TAB>form`, as distributed with MorfFlex.
    LemmaTagForm,
}

impl FromStr for ColumnOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "form-lemma-tag" => Ok(ColumnOrder::FormLemmaTag),
            "lemma-tag-form" => Ok(ColumnOrder::LemmaTagForm),
            _ => Err(format!(
                "unknown column order {s:?} (expected form-lemma-tag or lemma-tag-form)"
            )),
        }
    }
}

/// One `(lemma, tag)` reading of a form. Ordered by tag, then lemma.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Analysis {
    pub tag: Tag,
    pub lemma: Lemma,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MorphDict {
    entries: BTreeMap<String, Vec<Analysis>>,
    lemma_index: BTreeSet<String>,
    source: String,
    entry_count: usize,
}

/// Summary numbers for `dict-stats`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictStats {
    pub forms: usize,
    pub entries: usize,
    pub lemmas: usize,
    /// Number of forms with 1, 2, ..., 8 and 9+ analyses.
    pub ambiguity_histogram: [usize; 9],
}

impl MorphDict {
    /// Builds a dictionary from `(form, lemma, tag)` triples.
    pub fn from_entries<I>(source: &str, entries: I) -> Self
    where
        I: IntoIterator<Item = (String, Lemma, Tag)>,
    {
        let mut map: BTreeMap<String, BTreeSet<Analysis>> = BTreeMap::new();
        for (form, lemma, tag) in entries {
            map.entry(form).or_default().insert(Analysis { tag, lemma });
        }
        let mut lemma_index = BTreeSet::new();
        let mut entry_count = 0;
        let entries = map
            .into_iter()
            .map(|(form, set)| {
                entry_count += set.len();
                for a in &set {
                    lemma_index.insert(a.lemma.raw().to_owned());
                }
                (form, set.into_iter().collect())
            })
            .collect();
        MorphDict {
            entries,
            lemma_index,
            source: source.to_owned(),
            entry_count,
        }
    }

    pub fn load(path: impl AsRef<Path>, order: ColumnOrder) -> Result<Self, DictError> {
        let path = path.as_ref();
        let file = BufReader::new(File::open(path)?);
        Self::from_tsv(file, order, &path.display().to_string())
    }

    pub fn from_tsv<R: BufRead>(
        mut reader: R,
        order: ColumnOrder,
        source: &str,
    ) -> Result<Self, DictError> {
        let mut triples = Vec::new();
        let mut buf = Vec::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let line = std::str::from_utf8(&buf)
                .map_err(|_| DictError::EncodingError { line: line_no })?;
            let line = line.trim_end_matches(['\n', '\r']);
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(DictError::FormatError {
                    line: line_no,
                    message: format!("expected 3 TAB-separated columns, found {}", cols.len()),
                });
            }
            let (form, lemma, tag) = match order {
                ColumnOrder::FormLemmaTag => (cols[0], cols[1], cols[2]),
                ColumnOrder::LemmaTagForm => (cols[2], cols[0], cols[1]),
            };
            let bad = |message: String| DictError::FormatError {
                line: line_no,
                message,
            };
            if form.is_empty() {
                return Err(bad("empty form".into()));
            }
            let lemma = strip_comments(lemma).map_err(|e| bad(e.to_string()))?;
            let tag = Tag::new(tag).map_err(|e| bad(e.to_string()))?;
            triples.push((form.to_owned(), lemma, tag));
        }
        Ok(Self::from_entries(source, triples))
    }

    /// Opens either a binary cache or a TSV file, by sniffing the magic bytes.
    pub fn open(path: impl AsRef<Path>, order: ColumnOrder) -> Result<Self, DictError> {
        let path = path.as_ref();
        let mut head = [0u8; 8];
        let n = File::open(path)?.read(&mut head)?;
        if n == 8 && &head == MAGIC {
            Self::load_binary(path)
        } else {
            Self::load(path, order)
        }
    }

    /// Exact-match, case-sensitive lookup. An empty slice means OOV.
    pub fn lookup(&self, form: &str) -> &[Analysis] {
        self.entries.get(form).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Exact lookup, falling back to the lowercased form when that is OOV.
    pub fn lookup_lowercase_fallback(&self, form: &str) -> &[Analysis] {
        let exact = self.lookup(form);
        if !exact.is_empty() {
            return exact;
        }
        self.lookup(&fold_lowercase(form))
    }

    pub fn ambiguity(&self, form: &str) -> usize {
        self.lookup(form).len()
    }

    pub fn is_known_lemma(&self, lemma_raw: &str) -> bool {
        self.lemma_index.contains(lemma_raw)
    }

    pub fn contains(&self, form: &str, lemma_raw: &str, tag: &Tag) -> bool {
        self.lookup(form)
            .iter()
            .any(|a| &a.tag == tag && a.lemma.raw() == lemma_raw)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Number of distinct `(form, lemma, tag)` triples.
    pub fn entry_count(&self) -> usize {
        self.entry_count
    }

    pub fn form_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = (&str, &[Analysis])> {
        self.entries.iter().map(|(f, a)| (f.as_str(), a.as_slice()))
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.lemma_index.iter().map(String::as_str)
    }

    pub fn stats(&self) -> DictStats {
        let mut ambiguity_histogram = [0; 9];
        for analyses in self.entries.values() {
            ambiguity_histogram[analyses.len().clamp(1, 9) - 1] += 1;
        }
        DictStats {
            forms: self.form_count(),
            entries: self.entry_count,
            lemmas: self.lemma_index.len(),
            ambiguity_histogram,
        }
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<(), DictError> {
        let file = BufWriter::new(File::create(path)?);
        self.write_binary(file)?;
        Ok(())
    }

    pub fn write_binary<W: io::Write>(&self, out: W) -> io::Result<W> {
        let mut w = binio::Writer::new(out, MAGIC, VERSION)?;
        w.str(&self.source)?;
        w.len(self.entries.len())?;
        for (form, analyses) in &self.entries {
            w.str(form)?;
            w.len(analyses.len())?;
            for a in analyses {
                w.str(a.lemma.raw())?;
                w.str(a.tag.as_str())?;
            }
        }
        w.finish()
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self, DictError> {
        let file = BufReader::new(File::open(path)?);
        Self::read_binary(file)
    }

    pub fn read_binary<R: Read>(input: R) -> Result<Self, DictError> {
        let mut r = binio::Reader::new(input, MAGIC, VERSION, "dictionary")?;
        let corrupt = |m: String| DictError::Binary(BinError::Corrupt(m));
        let source = r.str()?;
        let forms = r.len()?;
        let mut triples = Vec::new();
        for _ in 0..forms {
            let form = r.str()?;
            let n = r.len()?;
            for _ in 0..n {
                let lemma = Lemma::parse(&r.str()?).map_err(|e| corrupt(e.to_string()))?;
                let tag = Tag::new(&r.str()?).map_err(|e| corrupt(e.to_string()))?;
                triples.push((form.clone(), lemma, tag));
            }
        }
        r.finish()?;
        Ok(Self::from_entries(&source, triples))
    }
}
