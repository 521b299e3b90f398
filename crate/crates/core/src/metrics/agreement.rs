//! Round-over-round agreement: Jaccard similarity over word n-gram sets.
//!
//! N-grams are built from word tokens (punctuation dropped), case-folded.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::metrics::text::words;

/// The set of lowercase word n-grams of `text`.
pub fn ngram_set(text: &str, n: usize) -> Result<HashSet<Vec<String>>> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n-gram order must be >= 1, got {n}")));
    }
    let tokens: Vec<String> = words(text).into_iter().map(|w| w.to_lowercase()).collect();
    Ok(tokens.windows(n).map(<[String]>::to_vec).collect())
}

/// `|A ∩ B| / |A ∪ B|` over word n-gram sets; 1.0 when both sets are empty.
pub fn ngram_jaccard(a: &str, b: &str, n: usize) -> Result<f64> {
    let sa = ngram_set(a, n)?;
    let sb = ngram_set(b, n)?;
    if sa.is_empty() && sb.is_empty() {
        return Ok(1.0);
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    Ok(inter as f64 / union as f64)
}
