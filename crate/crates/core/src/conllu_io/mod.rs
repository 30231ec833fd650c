//! CoNLL-U reading and writing, plus a rule-based tokenizer for raw text.
//!
//! PDT tags travel in the XPOS column and lemmas in LEMMA. Every other
//! column, comment line, multiword-token range and empty node is carried
//! through verbatim, so `write(read(x)) == x` for well-formed input.

mod tokenizer;

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::lemma_rules::Tag;

pub use tokenizer::{detokenize, tokenize, Abbreviations};

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected 10 TAB-separated columns, found {found}")]
    ColumnCountError { line: usize, found: usize },
    #[error("line {line}: token id {found} does not continue the sentence (expected {expected})")]
    NonContiguousIds {
        line: usize,
        expected: usize,
        found: String,
    },
    #[error("line {line}: invalid UTF-8")]
    EncodingError { line: usize },
    #[error("line {line}: {message}")]
    InvalidField { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: Option<String>,
    pub upos: String,
    pub xpos: Option<Tag>,
    pub feats: String,
    pub head: String,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A bare token with every other column empty.
    pub fn new(id: usize, form: &str) -> Self {
        Token {
            id,
            form: form.to_owned(),
            lemma: None,
            upos: "_".into(),
            xpos: None,
            feats: "_".into(),
            head: "_".into(),
            deprel: "_".into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    /// Values of the MISC column as `key=value` pairs.
    pub fn misc_fields(&self) -> impl Iterator<Item = (&str, &str)> {
        self.misc
            .split('|')
            .filter(|f| *f != "_" && !f.is_empty())
            .map(|f| f.split_once('=').unwrap_or((f, "")))
    }

    pub fn misc_value(&self, key: &str) -> Option<&str> {
        self.misc_fields().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

/// A CoNLL-U line that is not a regular token (multiword range or empty
/// node), kept verbatim in front of the token with index `before`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtraLine {
    pub before: usize,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub extra: Vec<ExtraLine>,
}

impl Sentence {
    pub fn from_forms<S: AsRef<str>>(forms: &[S]) -> Self {
        Sentence {
            comments: Vec::new(),
            tokens: forms
                .iter()
                .enumerate()
                .map(|(i, f)| Token::new(i + 1, f.as_ref()))
                .collect(),
            extra: Vec::new(),
        }
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Streaming reader yielding one sentence at a time.
pub struct ConlluReader<R> {
    input: R,
    line_no: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(input: R) -> Self {
        ConlluReader {
            input,
            line_no: 0,
            buf: Vec::new(),
            done: false,
        }
    }

    fn next_line(&mut self) -> Result<Option<String>, ConlluError> {
        self.buf.clear();
        if self.input.read_until(b'\n', &mut self.buf)? == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        String::from_utf8(std::mem::take(&mut self.buf))
            .map(Some)
            .map_err(|_| ConlluError::EncodingError { line: self.line_no })
    }

    fn read_sentence(&mut self) -> Result<Option<Sentence>, ConlluError> {
        let mut sentence = Sentence::default();
        let mut started = false;
        loop {
            let Some(line) = self.next_line()? else {
                self.done = true;
                break;
            };
            let line_no = self.line_no;
            if line.is_empty() {
                if started {
                    break;
                }
                continue;
            }
            started = true;
            if line.starts_with('#') && sentence.tokens.is_empty() && sentence.extra.is_empty() {
                sentence.comments.push(line);
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 10 {
                return Err(ConlluError::ColumnCountError {
                    line: line_no,
                    found: cols.len(),
                });
            }
            let id = cols[0];
            if id.contains('-') || id.contains('.') {
                sentence.extra.push(ExtraLine {
                    before: sentence.tokens.len(),
                    raw: line.clone(),
                });
                continue;
            }
            let expected = sentence.tokens.len() + 1;
            if id.parse::<usize>().ok() != Some(expected) || id.starts_with('0') {
                return Err(ConlluError::NonContiguousIds {
                    line: line_no,
                    expected,
                    found: id.to_owned(),
                });
            }
            if cols[1].is_empty() {
                return Err(ConlluError::InvalidField {
                    line: line_no,
                    message: "empty FORM".into(),
                });
            }
            let xpos = match cols[4] {
                "_" => None,
                x => Some(Tag::new(x).map_err(|e| ConlluError::InvalidField {
                    line: line_no,
                    message: e.to_string(),
                })?),
            };
            sentence.tokens.push(Token {
                id: expected,
                form: cols[1].to_owned(),
                lemma: (cols[2] != "_").then(|| cols[2].to_owned()),
                upos: cols[3].to_owned(),
                xpos,
                feats: cols[5].to_owned(),
                head: cols[6].to_owned(),
                deprel: cols[7].to_owned(),
                deps: cols[8].to_owned(),
                misc: cols[9].to_owned(),
            });
        }
        if !started {
            return Ok(None);
        }
        if sentence.tokens.is_empty() {
            return Err(ConlluError::InvalidField {
                line: self.line_no,
                message: "sentence without tokens".into(),
            });
        }
        Ok(Some(sentence))
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<Sentence, ConlluError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_sentence() {
            Ok(Some(s)) => Some(Ok(s)),
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn read_conllu(path: impl AsRef<Path>) -> Result<Vec<Sentence>, ConlluError> {
    let file = BufReader::new(File::open(path)?);
    ConlluReader::new(file).collect()
}

pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>, ConlluError> {
    ConlluReader::new(text.as_bytes()).collect()
}

pub fn write_sentence(sentence: &Sentence, out: &mut String) {
    for c in &sentence.comments {
        out.push_str(c);
        out.push('\n');
    }
    let mut extra = sentence.extra.iter().peekable();
    for (i, t) in sentence.tokens.iter().enumerate() {
        while let Some(e) = extra.next_if(|e| e.before <= i) {
            out.push_str(&e.raw);
            out.push('\n');
        }
        let cols = [
            t.id.to_string().as_str(),
            &t.form,
            t.lemma.as_deref().unwrap_or("_"),
            &t.upos,
            t.xpos.as_ref().map_or("_", Tag::as_str),
            &t.feats,
            &t.head,
            &t.deprel,
            &t.deps,
            &t.misc,
        ]
        .join("\t");
        out.push_str(&cols);
        out.push('\n');
    }
    for e in extra {
        out.push_str(&e.raw);
        out.push('\n');
    }
    out.push('\n');
}

pub fn write_conllu(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        write_sentence(s, &mut out);
    }
    out
}
