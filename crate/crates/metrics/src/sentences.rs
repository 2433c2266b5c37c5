//! Rule-based sentence segmentation.
//!
//! Text is first cut into paragraphs at blank lines. Inside a paragraph a
//! sentence ends at `.`, `!` or `?` when the terminator (plus any closing
//! quotes or brackets) is followed by whitespace or the end of the paragraph.
//! A `.` does not end a sentence when the segment so far is a bare list
//! enumerator (`1.`, `a.`) or when the word before it is one of a few
//! abbreviations common in patents (`FIG.`, `e.g.`, `No.`).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::text::content_tokens;

/// Segments with fewer content tokens than this are flagged `short`.
pub const SHORT_SENTENCE_TOKENS: usize = 3;

const ABBREVIATIONS: &[&str] = &[
    "fig", "figs", "e.g", "i.e", "no", "nos", "approx", "vs", "cf", "ref", "u.s", "al",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    /// Lowercase content tokens after stopword removal.
    pub tokens: BTreeSet<String>,
    pub short: bool,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = content_tokens(&text);
        let short = tokens.len() < SHORT_SENTENCE_TOKENS;
        Self {
            text,
            tokens,
            short,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSet {
    pub sentences: Vec<Sentence>,
}

impl SentenceSet {
    pub fn n(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_sets(&self) -> impl Iterator<Item = &BTreeSet<String>> {
        self.sentences.iter().map(|s| &s.tokens)
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(|s| s.text.as_str())
    }

    pub fn short_count(&self) -> usize {
        self.sentences.iter().filter(|s| s.short).count()
    }
}

impl FromIterator<Sentence> for SentenceSet {
    fn from_iter<I: IntoIterator<Item = Sentence>>(iter: I) -> Self {
        Self {
            sentences: iter.into_iter().collect(),
        }
    }
}

pub fn split_sentences(text: &str) -> SentenceSet {
    paragraphs(text)
        .flat_map(|p| split_paragraph(&p))
        .map(Sentence::new)
        .collect()
}

fn paragraphs(text: &str) -> impl Iterator<Item = String> + '_ {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n"));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n"));
    }
    out.into_iter()
}

fn split_paragraph(paragraph: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            // Swallow runs like "?!" or "..." and trailing closers.
            let mut end = i + 1;
            while end < chars.len() && matches!(chars[end].1, '.' | '!' | '?') {
                end += 1;
            }
            while end < chars.len() && CLOSERS.contains(&chars[end].1) {
                end += 1;
            }
            let at_boundary = end == chars.len() || chars[end].1.is_whitespace();
            if at_boundary {
                let byte_end = chars.get(end).map_or(paragraph.len(), |&(b, _)| b);
                let byte_term = chars[i].0;
                let segment = &paragraph[start..byte_end];
                let before = &paragraph[start..byte_term];
                if c != '.' || !(is_enumerator(before) || ends_with_abbreviation(before)) {
                    let trimmed = segment.trim();
                    if !trimmed.is_empty() {
                        sentences.push(trimmed.to_string());
                    }
                    start = byte_end;
                }
            }
            i = end;
            continue;
        }
        i += 1;
    }
    let tail = paragraph[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

fn is_enumerator(before: &str) -> bool {
    let s = before.trim();
    if s.is_empty() {
        return false;
    }
    s.chars().all(|c| c.is_ascii_digit())
        || (s.chars().count() == 1 && s.chars().all(|c| c.is_alphabetic()))
}

fn ends_with_abbreviation(before: &str) -> bool {
    let last = before
        .split_whitespace()
        .last()
        .unwrap_or("")
        .trim_start_matches(['(', '[', '"', '\''])
        .to_lowercase();
    ABBREVIATIONS.contains(&last.as_str())
}
