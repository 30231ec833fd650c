//! Deterministic rule-based segmentation.
//!
//! Tokens are whitespace-separated chunks with non-alphanumeric characters
//! peeled off both edges. A run of `.`, `!`, `?` or `…` stays one token.
//! A sentence ends after such a run when it is followed by whitespace and a
//! token starting with an uppercase letter or a digit, at a blank line, and
//! at the end of the text. Whitespace is recorded in MISC as `SpaceAfter=No`,
//! `SpacesAfter=` and `SpacesBefore=` so the text can be rebuilt exactly.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use super::{Sentence, Token};

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Dr.", "Ing.", "Mgr.", "Bc.", "prof.", "Prof.", "doc.", "Doc.", "MUDr.", "JUDr.", "PhDr.",
    "RNDr.", "např.", "tj.", "tzv.", "atd.", "apod.", "resp.", "mj.", "str.", "č.", "sv.", "kpt.",
    "pplk.", "gen.", "p.", "pí.", "min.", "max.", "cca.", "viz.",
];

/// Tokens after which a final `.` is not split off and no sentence ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abbreviations(HashSet<String>);

impl Default for Abbreviations {
    fn default() -> Self {
        Abbreviations(
            DEFAULT_ABBREVIATIONS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    }
}

impl Abbreviations {
    pub fn none() -> Self {
        Abbreviations(HashSet::new())
    }

    pub fn from_list<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Self {
        Abbreviations(items.into_iter().map(Into::into).collect())
    }

    /// One abbreviation per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(Self::parse(&text))
    }

    pub fn parse(text: &str) -> Self {
        Self::from_list(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }
}

fn is_final_punct(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

/// Splits one whitespace-free chunk into token strings.
fn split_chunk<'a>(chunk: &'a str, abbreviations: &Abbreviations) -> Vec<&'a str> {
    if abbreviations.contains(chunk) {
        return vec![chunk];
    }
    let Some(core_start) = chunk.find(char::is_alphanumeric) else {
        return split_punct(chunk);
    };
    let (last, last_c) = chunk
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .unwrap();
    let mut core_end = last + last_c.len_utf8();
    if chunk[core_end..].starts_with('.')
        && abbreviations.contains(&chunk[core_start..core_end + 1])
    {
        core_end += 1;
    }
    let mut tokens = split_punct(&chunk[..core_start]);
    tokens.push(&chunk[core_start..core_end]);
    tokens.extend(split_punct(&chunk[core_end..]));
    tokens
}

/// Splits a run of punctuation: sentence-final runs stay together, every
/// other character becomes its own token.
fn split_punct(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let mut end = i + c.len_utf8();
        if is_final_punct(c) {
            while let Some(&(j, d)) = chars.peek() {
                if !is_final_punct(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
        }
        out.push(&text[start.max(i)..end]);
        start = end;
    }
    out
}

fn escape_spaces(ws: &str) -> String {
    let mut out = String::new();
    for c in ws.chars() {
        match c {
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
        }
    }
    out
}

fn unescape_spaces(text: &str) -> String {
    let mut out = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('s') => out.push(' '),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('u') => {
                let code: String = chars.by_ref().skip(1).take_while(|&c| c != '}').collect();
                if let Some(c) = u32::from_str_radix(&code, 16).ok().and_then(char::from_u32) {
                    out.push(c);
                }
            }
            Some(other) => out.push(other),
            None => {}
        }
    }
    out
}

struct RawToken<'a> {
    form: &'a str,
    space_after: &'a str,
}

fn is_paragraph_break(ws: &str) -> bool {
    ws.matches('\n').count() >= 2
}

/// Segments and tokenizes plain text.
pub fn tokenize(text: &str, abbreviations: &Abbreviations) -> Vec<Sentence> {
    let leading_len = text.len() - text.trim_start().len();
    let leading = &text[..leading_len];

    let mut raw: Vec<RawToken> = Vec::new();
    let mut rest = &text[leading_len..];
    while !rest.is_empty() {
        let chunk_len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let chunk = &rest[..chunk_len];
        let after = &rest[chunk_len..];
        let ws_len = after.len() - after.trim_start().len();
        let pieces = split_chunk(chunk, abbreviations);
        let n = pieces.len();
        for (i, form) in pieces.into_iter().enumerate() {
            raw.push(RawToken {
                form,
                space_after: if i + 1 == n { &after[..ws_len] } else { "" },
            });
        }
        rest = &after[ws_len..];
    }

    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut text_buf = String::new();
    for (i, t) in raw.iter().enumerate() {
        let mut token = Token::new(current.len() + 1, t.form);
        let mut misc = Vec::new();
        if i == 0 && !leading.is_empty() {
            misc.push(format!("SpacesBefore={}", escape_spaces(leading)));
        }
        match t.space_after {
            "" => misc.push("SpaceAfter=No".to_owned()),
            " " => {}
            ws => misc.push(format!("SpacesAfter={}", escape_spaces(ws))),
        }
        if !misc.is_empty() {
            token.misc = misc.join("|");
        }
        current.push(token);
        text_buf.push_str(t.form);

        let next = raw.get(i + 1);
        let ends = match next {
            None => true,
            Some(_) if is_paragraph_break(t.space_after) => true,
            Some(n) => {
                t.form.chars().all(is_final_punct)
                    && !t.space_after.is_empty()
                    && n.form
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
            }
        };
        if ends {
            sentences.push(Sentence {
                comments: vec![format!("# text = {text_buf}")],
                tokens: std::mem::take(&mut current),
                extra: Vec::new(),
            });
            text_buf.clear();
        } else if !t.space_after.is_empty() {
            text_buf.push(' ');
        }
    }
    sentences
}

/// Rebuilds the original text from tokenizer output.
pub fn detokenize(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for token in sentences.iter().flat_map(|s| &s.tokens) {
        if let Some(before) = token.misc_value("SpacesBefore") {
            out.push_str(&unescape_spaces(before));
        }
        out.push_str(&token.form);
        if token.misc_value("SpaceAfter") == Some("No") {
            continue;
        }
        match token.misc_value("SpacesAfter") {
            Some(ws) => out.push_str(&unescape_spaces(ws)),
            None => out.push(' '),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn forms(sentences: &[Sentence]) -> Vec<Vec<String>> {
        sentences
            .iter()
            .map(|s| s.forms().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn hello_world() {
        let s = tokenize("Ahoj světe.", &Abbreviations::default());
        assert_eq!(forms(&s), vec![vec!["Ahoj", "světe", "."]]);
        assert_eq!(s[0].comments, vec!["# text = Ahoj světe."]);
        assert_eq!(s[0].tokens[1].misc, "SpaceAfter=No");
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("", &Abbreviations::default()).is_empty());
        assert!(tokenize("  \n ", &Abbreviations::default()).is_empty());
    }

    #[test]
    fn abbreviation_does_not_end_sentence() {
        let abbr = Abbreviations::from_list(["Dr."]);
        let s = tokenize("Dr. Novák přišel.", &abbr);
        assert_eq!(forms(&s), vec![vec!["Dr.", "Novák", "přišel", "."]]);

        let s = tokenize("Dr. Novák přišel.", &Abbreviations::none());
        assert_eq!(
            forms(&s),
            vec![vec!["Dr", "."], vec!["Novák", "přišel", "."]]
        );
    }

    #[test]
    fn sentence_breaks() {
        let s = tokenize(
            "Prší. Venku je zima! kde? 3 lidé... Konec",
            &Abbreviations::none(),
        );
        assert_eq!(
            forms(&s),
            vec![
                vec!["Prší", "."],
                vec!["Venku", "je", "zima", "!", "kde", "?"],
                vec!["3", "lidé", "..."],
                vec!["Konec"],
            ]
        );
    }

    #[test]
    fn punctuation_peeling() {
        let s = tokenize("„Ano,“ řekl (asi) e-mailem 3.5%.", &Abbreviations::none());
        assert_eq!(
            forms(&s),
            vec![vec![
                "„", "Ano", ",", "“", "řekl", "(", "asi", ")", "e-mailem", "3.5", "%", "."
            ]]
        );
    }

    #[test]
    fn abbreviation_inside_punctuation() {
        let abbr = Abbreviations::from_list(["např."]);
        let s = tokenize("(např.) ok", &abbr);
        assert_eq!(forms(&s), vec![vec!["(", "např.", ")", "ok"]]);
    }

    #[test]
    fn blank_line_breaks_sentence() {
        let s = tokenize("bez tečky\n\ndruhý", &Abbreviations::none());
        assert_eq!(forms(&s), vec![vec!["bez", "tečky"], vec!["druhý"]]);
    }

    #[test]
    fn lossless_whitespace() {
        let text = "  Ahoj,\tsvěte.\n\nJak  se\u{a0}máš?\n";
        let s = tokenize(text, &Abbreviations::default());
        assert_eq!(detokenize(&s), text);
    }

    #[test]
    fn abbreviation_file_format() {
        let abbr = Abbreviations::parse("# comment\nDr.\n\n  Ing. \n");
        assert!(abbr.contains("Dr.") && abbr.contains("Ing."));
        assert!(!abbr.contains("# comment"));
    }

    fn text() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-zA-ZčŘ0-9 .,!?\n()\"-]{0,40}").unwrap()
    }

    proptest! {
        #[test]
        fn concatenation_stability(a in text(), b in text()) {
            let abbr = Abbreviations::default();
            let mut joined = tokenize(&a, &abbr);
            joined.extend(tokenize(&b, &abbr));
            let whole = tokenize(&format!("{a}\n\n{b}"), &abbr);
            prop_assert_eq!(forms(&joined), forms(&whole));
        }

        #[test]
        fn detokenize_is_lossless(t in text()) {
            let s = tokenize(&t, &Abbreviations::default());
            if s.is_empty() {
                prop_assert!(t.trim().is_empty());
            } else {
                prop_assert_eq!(detokenize(&s), t);
            }
        }

        #[test]
        fn deterministic_and_well_formed(t in text()) {
            let abbr = Abbreviations::default();
            let s = tokenize(&t, &abbr);
            prop_assert_eq!(&s, &tokenize(&t, &abbr));
            for sentence in &s {
                prop_assert!(!sentence.tokens.is_empty());
                for (i, tok) in sentence.tokens.iter().enumerate() {
                    prop_assert_eq!(tok.id, i + 1);
                    prop_assert!(!tok.form.is_empty());
                    prop_assert!(!tok.form.chars().any(char::is_whitespace));
                }
            }
        }
    }
}
