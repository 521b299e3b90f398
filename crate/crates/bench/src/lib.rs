//! Shared inputs for the benchmarks.

use hyperdesc_core::FiveMetricRating;

const WORDS: [&str; 16] = [
    "a", "red", "bicycle", "leans", "against", "the", "white", "fence", "while", "two", "children", "watch",
    "from", "wooden", "bench", "nearby",
];

/// Deterministic pseudo-text of `sentences` sentences.
pub fn description(sentences: usize, salt: usize) -> String {
    (0..sentences)
        .map(|s| {
            let words: Vec<&str> = (0..12).map(|w| WORDS[(s * 7 + w * 3 + salt) % WORDS.len()]).collect();
            let mut sentence = words.join(" ");
            sentence[..1].make_ascii_uppercase();
            sentence + "."
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `n` ratings cycling through every bucket.
pub fn ratings(n: usize) -> Vec<FiveMetricRating> {
    (0..n)
        .map(|i| {
            let v = |k: usize| ((i * (k + 1) + k) % 5) as i8 - 2;
            FiveMetricRating::new(v(0), v(1), v(2), v(3), v(4))
        })
        .collect()
}
