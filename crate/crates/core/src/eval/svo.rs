//! Negative captions from subject-verb-object triplets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvoTriplet {
    pub subject: String,
    pub verb: String,
    pub object: String,
}

impl SvoTriplet {
    pub fn new(subject: &str, verb: &str, object: &str) -> Self {
        Self {
            subject: subject.into(),
            verb: verb.into(),
            object: object.into(),
        }
    }

    /// Parses `"man,lie,beach"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [s, v, o] if !s.is_empty() && !v.is_empty() && !o.is_empty() => Ok(Self::new(s, v, o)),
            _ => Err(Error::InvalidArgument(format!("not an s,v,o triplet: {s:?}"))),
        }
    }

    fn fields(&self) -> [&str; 3] {
        [&self.subject, &self.verb, &self.object]
    }
}

/// Byte spans of word tokens: alphanumeric runs, joined across inner hyphens.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i;
        while j < chars.len() {
            let c = chars[j].1;
            let inner_hyphen = c == '-'
                && j + 1 < chars.len()
                && chars[j + 1].1.is_alphanumeric()
                && j > i;
            if c.is_alphanumeric() || inner_hyphen {
                j += 1;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |c| c.0);
        spans.push((start, end));
        i = j;
    }
    spans
}

fn match_case(original: &str, replacement: &str) -> String {
    match original.chars().next() {
        Some(c) if c.is_uppercase() => {
            let mut out = String::with_capacity(replacement.len());
            let mut rest = replacement.chars();
            if let Some(first) = rest.next() {
                out.extend(first.to_uppercase());
            }
            out.extend(rest);
            out
        }
        _ => replacement.to_string(),
    }
}

/// Swaps the one differing triplet element into the caption. The positive
/// element must appear as whole tokens (case-insensitive); inflected forms
/// do not match. The first occurrence is replaced and an initial capital
/// is kept.
pub fn svo_negative_caption(
    positive_caption: &str,
    negative: &SvoTriplet,
    positive: &SvoTriplet,
) -> Result<String> {
    let diffs: Vec<usize> = (0..3)
        .filter(|&k| !positive.fields()[k].eq_ignore_ascii_case(negative.fields()[k]))
        .collect();
    let k = match diffs.as_slice() {
        [k] => *k,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "triplets must differ in exactly one element, got {}",
                diffs.len()
            )))
        }
    };
    let from = positive.fields()[k];
    let to = negative.fields()[k];
    let needle: Vec<String> = word_spans(from)
        .into_iter()
        .map(|(a, b)| from[a..b].to_lowercase())
        .collect();
    if needle.is_empty() {
        return Err(Error::UnmatchedForm(from.to_string()));
    }
    let spans = word_spans(positive_caption);
    let lowered: Vec<String> = spans
        .iter()
        .map(|&(a, b)| positive_caption[a..b].to_lowercase())
        .collect();
    let hit = lowered
        .windows(needle.len())
        .position(|w| w == needle.as_slice())
        .ok_or_else(|| Error::UnmatchedForm(format!("{from:?} not in {positive_caption:?}")))?;
    let start = spans[hit].0;
    let end = spans[hit + needle.len() - 1].1;
    let replacement = match_case(&positive_caption[start..end], to);
    Ok(format!(
        "{}{}{}",
        &positive_caption[..start],
        replacement,
        &positive_caption[end..]
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_swap() {
        let got = svo_negative_caption(
            "a dog chases a ball",
            &SvoTriplet::new("dog", "carries", "ball"),
            &SvoTriplet::new("dog", "chases", "ball"),
        )
        .unwrap();
        assert_eq!(got, "a dog carries a ball");
    }

    #[test]
    fn root_form_is_unmatched() {
        let e = svo_negative_caption(
            "A man lying on a beach.",
            &SvoTriplet::parse("man,sit,beach").unwrap(),
            &SvoTriplet::parse("man,lie,beach").unwrap(),
        );
        assert!(matches!(e, Err(Error::UnmatchedForm(_))));
    }

    #[test]
    fn capital_preserved_and_whole_tokens_only() {
        let got = svo_negative_caption(
            "Dogs and a dog play.",
            &SvoTriplet::new("cat", "play", "x"),
            &SvoTriplet::new("dog", "play", "x"),
        )
        .unwrap();
        assert_eq!(got, "Dogs and a cat play.");
        let got = svo_negative_caption(
            "Man on a horse.",
            &SvoTriplet::new("woman", "ride", "horse"),
            &SvoTriplet::new("man", "ride", "horse"),
        )
        .unwrap();
        assert_eq!(got, "Woman on a horse.");
    }

    #[test]
    fn multiword_and_hyphen() {
        let got = svo_negative_caption(
            "a girl in a t-shirt holds a tennis ball",
            &SvoTriplet::new("girl", "hold", "golf ball"),
            &SvoTriplet::new("girl", "hold", "tennis ball"),
        )
        .unwrap();
        assert_eq!(got, "a girl in a t-shirt holds a golf ball");
    }

    #[test]
    fn must_differ_in_one() {
        let a = SvoTriplet::new("a", "b", "c");
        assert!(matches!(svo_negative_caption("a b c", &a, &a), Err(Error::InvalidArgument(_))));
        let b = SvoTriplet::new("x", "y", "c");
        assert!(matches!(svo_negative_caption("a b c", &b, &a), Err(Error::InvalidArgument(_))));
        assert!(SvoTriplet::parse("a,b").is_err());
    }
}
