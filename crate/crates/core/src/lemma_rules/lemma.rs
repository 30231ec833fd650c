use std::fmt;

use serde::{Deserialize, Serialize};

use super::LemmaError;

/// A PDT lemma with technical comments removed.
///
/// `raw` keeps the sense number (`jak-2`); `proper` drops it (`jak`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Lemma {
    raw: String,
    proper_len: usize,
    sense: Option<u32>,
}

impl Lemma {
    /// Parses an already comment-free lemma.
    pub fn parse(raw: &str) -> Result<Self, LemmaError> {
        if raw.is_empty() {
            return Err(LemmaError::EmptyLemma);
        }
        if raw.contains('_') && raw.len() > 1 {
            return Err(LemmaError::CommentMarkup(raw.to_owned()));
        }
        let (proper_len, sense) = split_sense(raw);
        Ok(Lemma {
            raw: raw.to_owned(),
            proper_len,
            sense,
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn proper(&self) -> &str {
        &self.raw[..self.proper_len]
    }

    pub fn sense(&self) -> Option<u32> {
        self.sense
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl TryFrom<String> for Lemma {
    type Error = LemmaError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Lemma::parse(&value)
    }
}

impl From<Lemma> for String {
    fn from(value: Lemma) -> Self {
        value.raw
    }
}

/// Removes MorfFlex comment markup (everything from the first `_`) and
/// parses the `-N` sense suffix.
///
/// A lone `_` is kept as is, since it is the lemma of the underscore token.
pub fn strip_comments(raw_morfflex_lemma: &str) -> Result<Lemma, LemmaError> {
    let stripped = match raw_morfflex_lemma.find('_') {
        Some(0) if raw_morfflex_lemma == "_" => raw_morfflex_lemma,
        Some(pos) => &raw_morfflex_lemma[..pos],
        None => raw_morfflex_lemma,
    };
    Lemma::parse(stripped)
}

/// Returns the byte length of the proper part and the sense number.
fn split_sense(raw: &str) -> (usize, Option<u32>) {
    let Some(dash) = raw.rfind('-') else {
        return (raw.len(), None);
    };
    let digits = &raw[dash + 1..];
    let before = raw[..dash].chars().next_back();
    let valid = !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && !digits.starts_with('0')
        && before.is_some_and(|c| !c.is_ascii_digit());
    if !valid {
        return (raw.len(), None);
    }
    match digits.parse::<u32>() {
        Ok(sense) => (dash, Some(sense)),
        Err(_) => (raw.len(), None),
    }
}

/// A positional morphological tag, stored in the XPOS column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag(String);

impl Tag {
    pub const PDT_LENGTH: usize = 15;

    /// Accepts any non-empty string without whitespace.
    pub fn new(value: &str) -> Result<Self, LemmaError> {
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(LemmaError::InvalidTag(value.to_owned()));
        }
        Ok(Tag(value.to_owned()))
    }

    /// Accepts only 15-position PDT-C tags made of alphanumerics and `-`.
    pub fn strict(value: &str) -> Result<Self, LemmaError> {
        let ok = value.chars().count() == Self::PDT_LENGTH
            && value.chars().all(|c| c.is_alphanumeric() || c == '-');
        if !ok {
            return Err(LemmaError::InvalidTag(value.to_owned()));
        }
        Ok(Tag(value.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Tag {
    type Error = LemmaError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Tag::new(&value)
    }
}

impl From<Tag> for String {
    fn from(value: Tag) -> Self {
        value.0
    }
}
