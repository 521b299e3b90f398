//! Deterministic rule-based tokenization and sentence splitting.
//!
//! Tokens: whitespace-separated chunks, with leading and trailing
//! punctuation peeled off as separate tokens and English clitics split from
//! their host (`it's` → `it`, `'s`). A token is a *word* when it contains at
//! least one alphanumeric character; everything else is punctuation.
//!
//! Sentences close on `.`, `!` or `?` (plus any run of terminators and closing
//! quotes/brackets) followed by whitespace or end of text. A period ending a
//! listed abbreviation does not close a sentence. Unterminated trailing text
//! is the final sentence.

use serde::{Deserialize, Serialize};

const CLITICS: [&str; 7] = ["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];
const CLOSERS: [char; 6] = ['"', '\'', '\u{201d}', '\u{2019}', ')', ']'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let kind = if text.chars().any(char::is_alphanumeric) {
            TokenKind::Word
        } else {
            TokenKind::Punct
        };
        Self { text, kind }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

/// Abbreviations whose trailing period neither splits a sentence nor
/// becomes a separate token. Matching is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextConfig {
    pub abbreviations: Vec<String>,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            abbreviations: ["e.g.", "i.e.", "etc.", "Mr.", "Mrs.", "Dr."]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl TextConfig {
    pub fn with_abbreviations<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut cfg = Self::default();
        cfg.abbreviations.extend(extra.into_iter().map(Into::into));
        cfg
    }

    pub fn is_abbreviation(&self, word: &str) -> bool {
        self.abbreviations
            .iter()
            .any(|a| a.to_lowercase() == word.to_lowercase())
    }
}

pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_with(text, &TextConfig::default())
}

pub fn tokenize_with(text: &str, cfg: &TextConfig) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, cfg, &mut out);
    }
    out
}

/// Word tokens only, in order.
pub fn words(text: &str) -> Vec<String> {
    words_with(text, &TextConfig::default())
}

pub fn words_with(text: &str, cfg: &TextConfig) -> Vec<String> {
    tokenize_with(text, cfg)
        .into_iter()
        .filter(Token::is_word)
        .map(|t| t.text)
        .collect()
}

fn split_chunk(chunk: &str, cfg: &TextConfig, out: &mut Vec<Token>) {
    let mut core = chunk;
    while let Some(c) = core.chars().next() {
        if c.is_alphanumeric() || cfg.is_abbreviation(core) {
            break;
        }
        out.push(Token::new(c.to_string()));
        core = &core[c.len_utf8()..];
    }

    let mut trailing = Vec::new();
    while let Some(c) = core.chars().last() {
        if c.is_alphanumeric() || cfg.is_abbreviation(core) {
            break;
        }
        trailing.push(c);
        core = &core[..core.len() - c.len_utf8()];
    }

    if !core.is_empty() {
        match clitic_split(core) {
            Some((host, clitic)) => {
                out.push(Token::new(host));
                out.push(Token::new(clitic));
            }
            None => out.push(Token::new(core)),
        }
    }
    out.extend(trailing.into_iter().rev().map(|c| Token::new(c.to_string())));
}

fn clitic_split(word: &str) -> Option<(&str, &str)> {
    let normalized = word.replace('\u{2019}', "'");
    let lower = normalized.to_lowercase();
    for clitic in CLITICS {
        if lower.ends_with(clitic) && lower.len() > clitic.len() {
            // Same number of chars in `word` as in `lower` for these suffixes.
            let clitic_chars = clitic.chars().count();
            let split = word
                .char_indices()
                .rev()
                .nth(clitic_chars - 1)
                .map(|(i, _)| i)?;
            let host = &word[..split];
            if host.chars().last().is_some_and(char::is_alphanumeric) {
                return Some((host, &word[split..]));
            }
        }
    }
    None
}

pub fn split_sentences(text: &str) -> Vec<String> {
    split_sentences_with(text, &TextConfig::default())
}

pub fn split_sentences_with(text: &str, cfg: &TextConfig) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i].1;
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < chars.len()
            && (matches!(chars[j + 1].1, '.' | '!' | '?') || CLOSERS.contains(&chars[j + 1].1))
        {
            j += 1;
        }
        let end = chars[j].0 + chars[j].1.len_utf8();
        let at_boundary = j + 1 == chars.len() || chars[j + 1].1.is_whitespace();
        if at_boundary && !(c == '.' && ends_with_abbreviation(&text[start..end], cfg)) {
            push_trimmed(&mut sentences, &text[start..end]);
            start = end;
        }
        i = j + 1;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn ends_with_abbreviation(span: &str, cfg: &TextConfig) -> bool {
    let last = span.split_whitespace().last().unwrap_or("");
    let last = last.trim_start_matches(|c: char| !c.is_alphanumeric());
    cfg.is_abbreviation(last)
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}
