//! Strict tag-protocol parsing of model outputs.
//!
//! Tags are matched case-sensitively. Whitespace is tolerated inside the
//! angle brackets (`< Result >`) and around the content, which is trimmed.
//! Line breaks are irrelevant.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("tag <{0}> not found")]
    TagMissing(String),
    #[error("tag <{tag}> expected once, found {count} times")]
    TagDuplicated { tag: String, count: usize },
    #[error("tag <{0}> is not closed")]
    TagUnclosed(String),
    #[error("tag <{0}> is nested inside itself")]
    TagNested(String),
    #[error("no <{0}-k> blocks found")]
    NoSections(String),
    #[error("block indices must run 1, 2, ..., found {0:?}")]
    NonContiguousIndices(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    ExactlyOne,
    OneOrMore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSpec {
    pub tag_name: String,
    pub multiplicity: Multiplicity,
}

impl TagSpec {
    pub fn one(tag_name: impl Into<String>) -> Self {
        Self {
            tag_name: tag_name.into(),
            multiplicity: Multiplicity::ExactlyOne,
        }
    }

    pub fn many(tag_name: impl Into<String>) -> Self {
        Self {
            tag_name: tag_name.into(),
            multiplicity: Multiplicity::OneOrMore,
        }
    }

    pub fn format_reminder(&self) -> String {
        format!(
            "Your previous reply did not follow the required output format. \
             Reply again and put the answer inside <{0}></{0}> tags.",
            self.tag_name
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagValue {
    One(String),
    Many(Vec<String>),
}

/// Wraps content in a tag pair.
pub fn wrap(content: &str, tag: &str) -> String {
    format!("<{tag}>{content}</{tag}>")
}

/// Compiled patterns keyed by their source; the set of tag names is small.
fn cached(pattern: String) -> Regex {
    static CACHE: OnceLock<Mutex<HashMap<String, Regex>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("pattern cache poisoned");
    cache
        .entry(pattern)
        .or_insert_with_key(|p| Regex::new(p).expect("tag pattern compiles"))
        .clone()
}

fn tag_pattern(name: &str) -> Regex {
    let name = name
        .split_whitespace()
        .map(regex::escape)
        .collect::<Vec<_>>()
        .join(r"\s+");
    cached(format!(r"<\s*(/)?\s*{name}\s*>"))
}

/// Every `<name>…</name>` block in document order, trimmed.
pub fn extract_all(output: &str, name: &str) -> Result<Vec<String>, TagError> {
    let re = tag_pattern(name);
    let mut found = Vec::new();
    let mut open: Option<usize> = None;
    for m in re.captures_iter(output) {
        let whole = m.get(0).expect("match");
        let closing = m.get(1).is_some();
        match (closing, open) {
            (false, Some(_)) => return Err(TagError::TagNested(name.to_string())),
            (false, None) => open = Some(whole.end()),
            (true, Some(start)) => {
                found.push(output[start..whole.start()].trim().to_string());
                open = None;
            }
            // A stray closing tag outside any block is ignored.
            (true, None) => {}
        }
    }
    if open.is_some() {
        return Err(TagError::TagUnclosed(name.to_string()));
    }
    Ok(found)
}

pub fn extract_one(output: &str, name: &str) -> Result<String, TagError> {
    let mut all = extract_all(output, name)?;
    match all.len() {
        0 => Err(TagError::TagMissing(name.to_string())),
        1 => Ok(all.remove(0)),
        count => Err(TagError::TagDuplicated {
            tag: name.to_string(),
            count,
        }),
    }
}

pub fn extract_tag(output: &str, spec: &TagSpec) -> Result<TagValue, TagError> {
    match spec.multiplicity {
        Multiplicity::ExactlyOne => extract_one(output, &spec.tag_name).map(TagValue::One),
        Multiplicity::OneOrMore => {
            let all = extract_all(output, &spec.tag_name)?;
            if all.is_empty() {
                Err(TagError::TagMissing(spec.tag_name.clone()))
            } else {
                Ok(TagValue::Many(all))
            }
        }
    }
}

/// Parses `<{prefix}-k> … </{prefix}-k>` blocks; indices must be exactly
/// 1..m in document order.
pub fn extract_numbered(output: &str, prefix: &str) -> Result<Vec<(usize, String)>, TagError> {
    let re = cached(format!(r"<\s*(/)?\s*{}-(\d+)\s*>", regex::escape(prefix)));
    let mut blocks = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for m in re.captures_iter(output) {
        let whole = m.get(0).expect("match");
        let closing = m.get(1).is_some();
        // Indices too large for usize are treated as malformed numbering.
        let k: usize = m[2].parse().unwrap_or(usize::MAX);
        match (closing, open) {
            (false, Some((open_k, _))) => {
                return Err(if open_k == k {
                    TagError::TagNested(format!("{prefix}-{k}"))
                } else {
                    TagError::TagUnclosed(format!("{prefix}-{open_k}"))
                });
            }
            (false, None) => open = Some((k, whole.end())),
            (true, Some((open_k, start))) if open_k == k => {
                blocks.push((k, output[start..whole.start()].trim().to_string()));
                open = None;
            }
            (true, Some((open_k, _))) => {
                return Err(TagError::TagUnclosed(format!("{prefix}-{open_k}")));
            }
            (true, None) => {}
        }
    }
    if let Some((k, _)) = open {
        return Err(TagError::TagUnclosed(format!("{prefix}-{k}")));
    }
    if blocks.is_empty() {
        return Err(TagError::NoSections(prefix.to_string()));
    }
    let indices: Vec<usize> = blocks.iter().map(|(k, _)| *k).collect();
    if indices.iter().enumerate().any(|(i, &k)| k != i + 1) {
        return Err(TagError::NonContiguousIndices(indices));
    }
    Ok(blocks)
}

/// First-level `<Section-k>` blocks.
pub fn extract_sections(output: &str) -> Result<Vec<(usize, String)>, TagError> {
    extract_numbered(output, "Section")
}

pub fn numbered_reminder(prefix: &str) -> String {
    format!(
        "Your previous reply did not follow the required output format. \
         Reply again using <{prefix}-1> ... </{prefix}-1>, <{prefix}-2> ... </{prefix}-2> blocks, \
         numbered consecutively from 1."
    )
}
