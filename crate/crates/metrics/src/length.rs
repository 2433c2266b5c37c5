//! Length accounting: tokens, words, sentences, characters.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::sentences::split_sentences;
use crate::MetricsError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthStats {
    pub tokens: usize,
    pub words: usize,
    pub sentences: usize,
    pub chars: usize,
}

/// Ranked subword vocabulary: one token per line, most frequent merge first.
///
/// Encoding is rank-ordered pair merging over the characters of each
/// whitespace-delimited word (with its leading space attached, as GPT-style
/// vocabularies store it): the adjacent pair whose concatenation has the
/// lowest rank is merged until no concatenation is in the vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeVocab {
    name: String,
    ranks: HashMap<String, usize>,
}

impl BpeVocab {
    pub fn from_lines(name: impl Into<String>, text: &str) -> Result<Self, MetricsError> {
        let mut ranks = HashMap::new();
        for line in text.lines() {
            // Tokens may legitimately start with a space; only the newline is stripped.
            let tok = line.strip_suffix('\r').unwrap_or(line);
            if tok.is_empty() {
                continue;
            }
            let next = ranks.len();
            ranks.entry(tok.to_string()).or_insert(next);
        }
        if ranks.is_empty() {
            return Err(MetricsError::CounterConfig(
                "BPE vocabulary file contains no tokens".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            ranks,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            MetricsError::CounterConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_lines(name, &text)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn encode_piece(&self, piece: &str) -> usize {
        let mut parts: Vec<String> = piece.chars().map(String::from).collect();
        loop {
            let best = parts
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| {
                    let joined = format!("{}{}", w[0], w[1]);
                    self.ranks.get(&joined).map(|&r| (r, i))
                })
                .min();
            match best {
                Some((_, i)) => {
                    let right = parts.remove(i + 1);
                    parts[i].push_str(&right);
                }
                None => return parts.len(),
            }
        }
    }

    pub fn count(&self, text: &str) -> usize {
        text.split_whitespace()
            .enumerate()
            .map(|(i, w)| {
                if i == 0 {
                    self.encode_piece(w)
                } else {
                    self.encode_piece(&format!(" {w}"))
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Default)]
pub enum TokenCounter {
    #[default]
    Whitespace,
    Bpe(Arc<BpeVocab>),
}

impl TokenCounter {
    pub fn id(&self) -> String {
        match self {
            TokenCounter::Whitespace => "whitespace".to_string(),
            TokenCounter::Bpe(v) => format!("bpe:{}:{}", v.name(), v.len()),
        }
    }

    pub fn count(&self, text: &str) -> usize {
        match self {
            TokenCounter::Whitespace => text.split_whitespace().count(),
            TokenCounter::Bpe(v) => v.count(text),
        }
    }
}

pub fn length_stats(text: &str, counter: &TokenCounter) -> LengthStats {
    LengthStats {
        tokens: counter.count(text),
        words: text.split_whitespace().count(),
        sentences: split_sentences(text).n(),
        chars: text.chars().count(),
    }
}
