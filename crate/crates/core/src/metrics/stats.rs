//! Per-description linguistic counts and corpus-level means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::pos::{PosTag, PosTagger};
use crate::metrics::text::{split_sentences_with, words_with, TextConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TextStats {
    pub tokens: usize,
    pub sentences: usize,
    pub tokens_per_sentence: f64,
    pub nn: usize,
    pub adj: usize,
    pub adv: usize,
    pub vb: usize,
}

pub fn text_stats(text: &str, tagger: &dyn PosTagger) -> Result<TextStats> {
    text_stats_with(text, tagger, &TextConfig::default())
}

pub fn text_stats_with(text: &str, tagger: &dyn PosTagger, cfg: &TextConfig) -> Result<TextStats> {
    let words = words_with(text, cfg);
    let sentences = split_sentences_with(text, cfg).len();
    let tags = tagger.tag(&words);
    if tags.len() != words.len() {
        return Err(Error::Internal(format!(
            "tagger returned {} tags for {} tokens",
            tags.len(),
            words.len()
        )));
    }
    let count = |t: PosTag| tags.iter().filter(|x| **x == t).count();
    Ok(TextStats {
        tokens: words.len(),
        sentences,
        tokens_per_sentence: if sentences == 0 {
            0.0
        } else {
            words.len() as f64 / sentences as f64
        },
        nn: count(PosTag::Nn),
        adj: count(PosTag::Adj),
        adv: count(PosTag::Adv),
        vb: count(PosTag::Vb),
    })
}

/// One dataset row: sample count and per-description means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub sample_count: usize,
    pub tokens_per_sentence: f64,
    pub tokens: f64,
    pub sentences: f64,
    pub nn: f64,
    pub adj: f64,
    pub adv: f64,
    pub vb: f64,
}

pub fn corpus_stats<S: AsRef<str>>(descriptions: &[S], tagger: &dyn PosTagger) -> Result<CorpusRow> {
    if descriptions.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let stats = descriptions
        .iter()
        .map(|d| text_stats(d.as_ref(), tagger))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_row(&stats))
}

/// Means of already-computed per-description stats. `stats` must be non-empty.
pub fn mean_row(stats: &[TextStats]) -> CorpusRow {
    let n = stats.len() as f64;
    let mean = |f: fn(&TextStats) -> f64| stats.iter().map(f).sum::<f64>() / n;
    CorpusRow {
        sample_count: stats.len(),
        tokens_per_sentence: mean(|s| s.tokens_per_sentence),
        tokens: mean(|s| s.tokens as f64),
        sentences: mean(|s| s.sentences as f64),
        nn: mean(|s| s.nn as f64),
        adj: mean(|s| s.adj as f64),
        adv: mean(|s| s.adv as f64),
        vb: mean(|s| s.vb as f64),
    }
}
