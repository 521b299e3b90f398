//! Pure text measurement: tokens, sentences, agreement, POS counts,
//! readability and guideline lint. Everything here is deterministic and
//! reentrant.

pub mod agreement;
pub mod lint;
pub mod pos;
pub mod readability;
pub mod stats;
pub mod text;

pub use agreement::{ngram_jaccard, ngram_set};
pub use lint::{lint_description, lint_with, LintFinding, DEFAULT_FILLER_PHRASES};
pub use pos::{LexiconTagger, PosTag, PosTagger};
pub use readability::{
    corpus_readability, readability, readability_counts, readability_counts_with, readability_with, syllables,
    ReadabilityCounts, ReadabilityScores,
};
pub use stats::{corpus_stats, mean_row, text_stats, text_stats_with, CorpusRow, TextStats};
pub use text::{
    split_sentences, split_sentences_with, tokenize, tokenize_with, words, words_with, TextConfig,
    Token, TokenKind,
};
