//! Guideline lint: filler phrases that add no visual detail.

use serde::{Deserialize, Serialize};

pub const DEFAULT_FILLER_PHRASES: [&str; 4] = [
    "in this image",
    "we can see",
    "there is a",
    "this is a picture of",
];

/// A flagged span. `offset` and `len` count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub phrase: String,
    pub offset: usize,
    pub len: usize,
    pub matched: String,
}

pub fn lint_description(text: &str) -> Vec<LintFinding> {
    lint_with(text, &DEFAULT_FILLER_PHRASES)
}

/// Case-insensitive whole-word scan. Findings are sorted by offset and never
/// overlap; at a given position the longest phrase wins.
pub fn lint_with<S: AsRef<str>>(text: &str, phrases: &[S]) -> Vec<LintFinding> {
    let chars: Vec<char> = text.chars().collect();
    let mut patterns: Vec<(&str, Vec<char>)> = phrases
        .iter()
        .map(|p| p.as_ref())
        .filter(|p| !p.is_empty())
        .map(|p| (p, p.chars().collect()))
        .collect();
    patterns.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));

    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let at_word_start = i == 0 || !chars[i - 1].is_alphanumeric();
        let hit = at_word_start
            .then(|| {
                patterns.iter().find(|(_, pat)| {
                    let end = i + pat.len();
                    end <= chars.len()
                        && chars[i..end].iter().zip(pat).all(|(a, b)| chars_eq_ci(*a, *b))
                        && (end == chars.len() || !chars[end].is_alphanumeric())
                })
            })
            .flatten();
        match hit {
            Some((phrase, pat)) => {
                out.push(LintFinding {
                    phrase: phrase.to_string(),
                    offset: i,
                    len: pat.len(),
                    matched: chars[i..i + pat.len()].iter().collect(),
                });
                i += pat.len();
            }
            None => i += 1,
        }
    }
    out
}

fn chars_eq_ci(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}
