//! Grade-level readability formulas (ARI, Flesch-Kincaid, Gunning Fog, SMOG).
//!
//! All four scores are computed from one [`ReadabilityCounts`] value, so the
//! word, sentence and syllable totals behind them always agree.
//!
//! Syllables use a vowel-group heuristic: within each alphabetic run of a
//! word, count maximal groups of `a e i o u y`, drop one for a silent
//! trailing `e` (kept when the run ends in consonant + `le`), floor at 1. A
//! word's syllables are the sum over its runs, floored at 1, so `blue-eyed`
//! scores 2 and `42` scores 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::text::{split_sentences_with, words_with, TextConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReadabilityCounts {
    /// Letters and digits inside word tokens.
    pub characters: usize,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    /// Words of three or more syllables (complex for GF, polysyllabic for SMOG).
    pub polysyllables: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub ari: f64,
    pub fk: f64,
    pub gf: f64,
    pub smog: f64,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn run_syllables(run: &str) -> usize {
    let chars: Vec<char> = run.chars().collect();
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = chars.len();
    let consonant_le = n >= 3 && chars[n - 2] == 'l' && chars[n - 1] == 'e' && !is_vowel(chars[n - 3]);
    if n >= 1 && chars[n - 1] == 'e' && !consonant_le && groups > 0 {
        groups -= 1;
    }
    groups.max(1)
}

/// Heuristic syllable count of one word token.
pub fn syllables(word: &str) -> usize {
    let lower = word.to_lowercase();
    lower
        .split(|c: char| !c.is_alphabetic())
        .filter(|run| !run.is_empty())
        .map(run_syllables)
        .sum::<usize>()
        .max(1)
}

pub fn readability_counts(text: &str) -> ReadabilityCounts {
    readability_counts_with(text, &TextConfig::default())
}

pub fn readability_counts_with(text: &str, cfg: &TextConfig) -> ReadabilityCounts {
    let words = words_with(text, cfg);
    let mut counts = ReadabilityCounts {
        words: words.len(),
        sentences: split_sentences_with(text, cfg).len(),
        ..Default::default()
    };
    for w in &words {
        counts.characters += w.chars().filter(|c| c.is_alphanumeric()).count();
        let s = syllables(w);
        counts.syllables += s;
        if s >= 3 {
            counts.polysyllables += 1;
        }
    }
    counts
}

impl ReadabilityCounts {
    pub fn scores(&self) -> Result<ReadabilityScores> {
        if self.words == 0 || self.sentences == 0 {
            return Err(Error::InvalidArgument(
                "readability needs at least one word and one sentence".into(),
            ));
        }
        let w = self.words as f64;
        let s = self.sentences as f64;
        let words_per_sentence = w / s;
        Ok(ReadabilityScores {
            ari: 4.71 * (self.characters as f64 / w) + 0.5 * words_per_sentence - 21.43,
            fk: 0.39 * words_per_sentence + 11.8 * (self.syllables as f64 / w) - 15.59,
            gf: 0.4 * (words_per_sentence + 100.0 * self.polysyllables as f64 / w),
            smog: 1.0430 * (self.polysyllables as f64 * 30.0 / s).sqrt() + 3.1291,
        })
    }
}

pub fn readability(text: &str) -> Result<ReadabilityScores> {
    readability_counts(text).scores()
}

pub fn readability_with(text: &str, cfg: &TextConfig) -> Result<ReadabilityScores> {
    readability_counts_with(text, cfg).scores()
}

/// Mean of per-description scores over a corpus.
pub fn corpus_readability<S: AsRef<str>>(descriptions: &[S]) -> Result<ReadabilityScores> {
    if descriptions.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    let mut acc = ReadabilityScores::default();
    for d in descriptions {
        let s = readability(d.as_ref())?;
        acc.ari += s.ari;
        acc.fk += s.fk;
        acc.gf += s.gf;
        acc.smog += s.smog;
    }
    let n = descriptions.len() as f64;
    Ok(ReadabilityScores {
        ari: acc.ari / n,
        fk: acc.fk / n,
        gf: acc.gf / n,
        smog: acc.smog / n,
    })
}
