//! Tokenization shared by the metrics.
//!
//! Two tokenizers live here. [`word_tokens`] lowercases and splits on runs of
//! non-alphanumeric characters; it feeds ROUGE and BLEU. [`content_tokens`]
//! does the same and then drops stopwords, producing the set used for
//! sentence-level Jaccard similarity. Numbers are kept in both because claim
//! and figure numbers carry meaning in patent text.

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

/// Identifier of the bundled stopword list, recorded in every report.
pub const STOPWORD_LIST_ID: &str = "en-v1";

const STOPWORDS_EN_V1: &str = include_str!("../assets/stopwords_en_v1.txt");

/// The bundled English stopword list.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static LIST: OnceLock<HashSet<&'static str>> = OnceLock::new();
    LIST.get_or_init(|| {
        STOPWORDS_EN_V1
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Lowercased alphanumeric runs, in order, duplicates kept.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Lowercased alphanumeric runs with stopwords removed, as a set.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    word_tokens(text)
        .into_iter()
        .filter(|w| !is_stopword(w))
        .collect()
}
