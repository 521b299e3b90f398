//! Coarse part-of-speech tagging behind a pluggable interface.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Nn,
    Adj,
    Adv,
    Vb,
    Other,
}

/// Tags a token sequence. Implementations must return exactly one tag per
/// input token.
pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> Vec<PosTag>;
}

impl<T: PosTagger + ?Sized> PosTagger for &T {
    fn tag(&self, tokens: &[String]) -> Vec<PosTag> {
        (**self).tag(tokens)
    }
}

impl<T: PosTagger + ?Sized> PosTagger for Box<T> {
    fn tag(&self, tokens: &[String]) -> Vec<PosTag> {
        (**self).tag(tokens)
    }
}

/// Bundled lexicon plus suffix-rule tagger.
///
/// APPROXIMATE: good enough for relative comparisons between corpora tagged
/// the same way, not a substitute for a statistical tagger. Plug a real one
/// in through [`PosTagger`] when absolute counts matter.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexiconTagger;

const OTHER: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every", "no",
    "its", "their", "his", "her", "my", "our", "your", "in", "on", "at", "of", "with", "to",
    "from", "by", "for", "near", "under", "over", "behind", "above", "below", "between",
    "beside", "into", "onto", "through", "across", "against", "along", "around", "atop",
    "inside", "outside", "toward", "towards", "upon", "within", "without", "beneath", "about",
    "like", "and", "or", "but", "nor", "so", "yet", "while", "as", "than", "because", "if",
    "although", "it", "they", "he", "she", "we", "you", "i", "them", "him", "us", "which",
    "who", "whom", "whose", "what", "where", "when", "there", "one", "two", "three", "four",
    "five", "six", "seven", "eight", "nine", "ten", "'s", "\u{2019}s", "both", "all",
];

const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does",
    "did", "can", "could", "will", "would", "may", "might", "must", "shall", "should", "'re",
    "'ve", "'ll", "'m", "'d", "ran", "run", "runs", "sit", "sits", "sat", "stand", "stands",
    "stood", "hold", "holds", "held", "wear", "wears", "wore", "show", "shows", "appear",
    "appears", "lie", "lies", "lay", "hang", "hangs", "hung", "look", "looks", "see", "seen",
    "seem", "seems", "make", "makes", "made", "go", "goes", "went", "take", "takes", "took",
    "give", "gives", "gave", "contain", "contains", "cover", "covers", "fill", "fills", "face",
    "faces", "read", "reads", "say", "says", "chase", "chases", "carry", "carries", "ride",
    "rides", "rode", "eat", "eats", "ate", "walk", "walks", "play", "plays", "swim", "swims",
    "fly", "flies", "grow", "grows", "lean", "leans", "rest", "rests", "reach", "reaches",
];

const ADVERBS: &[&str] = &[
    "very", "also", "quite", "too", "not", "n't", "almost", "just", "only", "well", "here",
    "rather", "somewhat", "together", "away", "back", "up", "down", "out", "off", "still",
    "even", "again", "always", "never", "often", "sometimes", "soon", "then", "now", "fairly",
    "far", "further", "much", "more", "most", "less",
];

const ADJECTIVES: &[&str] = &[
    "red", "blue", "green", "yellow", "white", "black", "brown", "gray", "grey", "pink",
    "purple", "orange", "golden", "silver", "dark", "light", "bright", "pale", "small", "large",
    "big", "tall", "short", "long", "wide", "narrow", "little", "tiny", "huge", "old", "new",
    "young", "wooden", "metal", "round", "square", "soft", "hard", "smooth", "rough", "clear",
    "blurry", "thin", "thick", "empty", "full", "open", "closed", "left", "right", "other",
    "several", "many", "few", "same", "different", "multiple", "top", "bottom", "front",
    "middle", "upper", "lower", "striped", "detailed", "fluffy", "curly", "early", "friendly",
    "lovely", "ugly", "silly", "daily", "wet", "dry", "hot", "cold", "warm", "cool", "high",
    "low", "deep", "flat", "sharp", "busy", "quiet", "calm", "heavy", "sunny", "cloudy",
    "shiny", "dirty", "clean", "happy", "modern", "rustic", "vintage", "fresh",
];

const ADJ_SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "al", "ic", "ish", "less"];

impl LexiconTagger {
    pub fn tag_word(word: &str) -> PosTag {
        let w = word.to_lowercase().replace('\u{2019}', "'");
        let in_list = |list: &[&str]| list.contains(&w.as_str());
        if !w.chars().any(char::is_alphabetic) {
            return PosTag::Other;
        }
        if in_list(OTHER) {
            return PosTag::Other;
        }
        if in_list(VERBS) {
            return PosTag::Vb;
        }
        if in_list(ADVERBS) {
            return PosTag::Adv;
        }
        if in_list(ADJECTIVES) {
            return PosTag::Adj;
        }
        let long = w.chars().count() > 4;
        if long && w.ends_with("ly") {
            return PosTag::Adv;
        }
        if long && (w.ends_with("ing") || w.ends_with("ed")) {
            return PosTag::Vb;
        }
        if long && ADJ_SUFFIXES.iter().any(|s| w.ends_with(s)) {
            return PosTag::Adj;
        }
        PosTag::Nn
    }
}

impl PosTagger for LexiconTagger {
    fn tag(&self, tokens: &[String]) -> Vec<PosTag> {
        tokens.iter().map(|t| Self::tag_word(t)).collect()
    }
}
