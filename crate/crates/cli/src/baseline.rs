//! Single-call zero-shot baseline and the parser for its `<Patent>` output.

use std::sync::OnceLock;

use patentsmith_core::prompts::extract_one;
use regex::Regex;
use serde::{Deserialize, Serialize};

use patentsmith_core::domain::{SectionName, SectionTexts};

/// Tag name of each section inside `<Patent>`.
pub const SECTION_TAGS: [(SectionName, &str); 6] = [
    (SectionName::Title, "Title"),
    (SectionName::Abstract, "Abstract"),
    (SectionName::Background, "Background"),
    (SectionName::Summary, "Summary"),
    (SectionName::Claims, "Claims"),
    (SectionName::Description, "Full Description"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroShotParse {
    pub sections: SectionTexts,
    pub found: Vec<SectionName>,
    pub missing: Vec<SectionName>,
    /// Whether a well-formed `<Patent>` wrapper was present.
    pub patent_tag: bool,
    pub errors: Vec<String>,
}

impl ZeroShotParse {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Rewrites known tags to their canonical case, so `</summary>` (as in the
/// bundled zero-shot template) closes `<Summary>`.
pub fn normalize_tag_case(raw: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"(?i)<\s*(/)?\s*(patent|title|abstract|background|summary|claims|full\s+description)\s*>")
            .expect("tag regex")
    });
    re.replace_all(raw, |c: &regex::Captures<'_>| {
        let name = c[2].to_ascii_lowercase();
        let canonical = match name.split_whitespace().collect::<Vec<_>>().join(" ").as_str() {
            "patent" => "Patent",
            "title" => "Title",
            "abstract" => "Abstract",
            "background" => "Background",
            "summary" => "Summary",
            "claims" => "Claims",
            _ => "Full Description",
        };
        format!("<{}{canonical}>", if c.get(1).is_some() { "/" } else { "" })
    })
    .into_owned()
}

/// Extracts whatever sections are present. Sections are searched inside
/// `<Patent>` when it is well formed and in the whole reply otherwise.
pub fn parse_zero_shot(raw: &str) -> ZeroShotParse {
    let text = normalize_tag_case(raw);
    let mut errors = Vec::new();
    let (body, patent_tag) = match extract_one(&text, "Patent") {
        Ok(inner) => (inner, true),
        Err(e) => {
            errors.push(e.to_string());
            (text.clone(), false)
        }
    };
    let mut sections = SectionTexts::default();
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for (name, tag) in SECTION_TAGS {
        match extract_one(&body, tag) {
            Ok(t) if !t.is_empty() => {
                sections.set(name, t);
                found.push(name);
            }
            Ok(_) => {
                errors.push(format!("tag <{tag}> is empty"));
                missing.push(name);
            }
            Err(e) => {
                errors.push(e.to_string());
                missing.push(name);
            }
        }
    }
    ZeroShotParse {
        sections,
        found,
        missing,
        patent_tag,
        errors,
    }
}
