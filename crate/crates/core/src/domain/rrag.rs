//! Reference bundle, retrieval results, examiner verdicts and per-subsection
//! drafting histories.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::pgtree::NodeId;
use super::{DomainError, Draft, SectionName};

/// Title, abstract, background, summary and claims plus the draft; consulted
/// while writing each description subsection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub background: String,
    pub summary: String,
    pub claims: String,
    pub draft: Draft,
}

impl Reference {
    pub fn parts(&self) -> [(SectionName, &str); 5] {
        [
            (SectionName::Title, self.title.as_str()),
            (SectionName::Abstract, self.abstract_text.as_str()),
            (SectionName::Background, self.background.as_str()),
            (SectionName::Summary, self.summary.as_str()),
            (SectionName::Claims, self.claims.as_str()),
        ]
    }

    /// First component whose text is blank, if any.
    pub fn first_missing(&self) -> Option<SectionName> {
        self.parts()
            .into_iter()
            .find(|(_, text)| text.trim().is_empty())
            .map(|(name, _)| name)
    }

    pub fn is_complete(&self) -> bool {
        self.first_missing().is_none()
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self.first_missing() {
            Some(name) => Err(DomainError::EmptySection(name)),
            None => Ok(()),
        }
    }

    /// Text bound into the retrieval prompt.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, text) in self.parts() {
            out.push_str(&format!("{}: {}\n\n", name.label(), text.trim()));
        }
        out.push_str("Draft:\n");
        out.push_str(&self.draft.render());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedContext {
    pub node: NodeId,
    pub content: String,
    /// Reference parts that share at least one non-trivial line with the
    /// extracted content.
    pub source_hint: String,
    pub empty_retrieval: bool,
}

impl RetrievedContext {
    pub fn new(node: NodeId, content: String, reference: &Reference) -> Self {
        let content = content.trim().to_string();
        let empty_retrieval = content.is_empty();
        let source_hint = if empty_retrieval {
            String::new()
        } else {
            source_hint(&content, reference)
        };
        Self {
            node,
            content,
            source_hint,
            empty_retrieval,
        }
    }
}

const HINT_MIN_LINE: usize = 12;

fn source_hint(content: &str, reference: &Reference) -> String {
    let lines: Vec<&str> = content
        .lines()
        .map(str::trim)
        .filter(|l| l.chars().count() >= HINT_MIN_LINE)
        .collect();
    let draft = reference.draft.render();
    let mut hits: Vec<&str> = reference
        .parts()
        .into_iter()
        .filter(|(_, text)| lines.iter().any(|l| text.contains(l)))
        .map(|(name, _)| name.key())
        .collect();
    if lines.iter().any(|l| draft.contains(l)) {
        hits.push("draft");
    }
    hits.join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "Pass",
            Verdict::Fail => "Fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewVerdict {
    pub result: Verdict,
    pub advice: String,
}

impl ReviewVerdict {
    pub fn new(result: Verdict, advice: impl Into<String>) -> Result<Self, DomainError> {
        let advice = advice.into();
        if advice.trim().is_empty() {
            return Err(DomainError::EmptyAdvice);
        }
        Ok(Self { result, advice })
    }

    pub fn passed(&self) -> bool {
        self.result == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub text: String,
    pub verdict: ReviewVerdict,
    /// The refinement returned exactly the previous text.
    #[serde(default)]
    pub no_change: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SubsectionStatus {
    Accepted,
    AcceptedWithWarning { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsectionDraft {
    pub node: NodeId,
    pub text: String,
    pub rounds_used: u32,
    pub final_verdict: ReviewVerdict,
    pub history: Vec<RoundRecord>,
    pub status: SubsectionStatus,
}

impl SubsectionDraft {
    pub fn has_warning(&self) -> bool {
        matches!(self.status, SubsectionStatus::AcceptedWithWarning { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draft() -> Draft {
        Draft::from_answers(["p", "b", "s", "k", "f"], None).unwrap()
    }

    fn reference() -> Reference {
        Reference {
            title: "Pump".into(),
            abstract_text: "An abstract about pumps.".into(),
            background: "Pumps are old technology.".into(),
            summary: "A summary of the pump invention.".into(),
            claims: "1. A pump comprising a rotor and a housing.".into(),
            draft: draft(),
        }
    }

    #[test]
    fn render_contains_everything() {
        let r = reference();
        let text = r.render();
        for (_, part) in r.parts() {
            assert!(text.contains(part));
        }
        assert!(text.contains(&r.draft.render()));
    }

    #[test]
    fn missing_part_detected() {
        let mut r = reference();
        assert!(r.is_complete());
        r.summary = " ".into();
        assert_eq!(r.first_missing(), Some(SectionName::Summary));
        assert_eq!(r.validate(), Err(DomainError::EmptySection(SectionName::Summary)));
    }

    #[test]
    fn retrieval_hint_and_empty_flag() {
        let r = reference();
        let ctx = RetrievedContext::new(NodeId::new(1, 1), r.claims.clone(), &r);
        assert_eq!(ctx.content, r.claims);
        assert_eq!(ctx.source_hint, "claims");
        assert!(!ctx.empty_retrieval);
        let empty = RetrievedContext::new(NodeId::new(1, 1), "  \n".into(), &r);
        assert!(empty.empty_retrieval);
        assert!(empty.content.is_empty());
    }

    #[test]
    fn verdict_requires_advice() {
        assert_eq!(ReviewVerdict::new(Verdict::Pass, " "), Err(DomainError::EmptyAdvice));
        assert!(ReviewVerdict::new(Verdict::Fail, "fix it").unwrap().result == Verdict::Fail);
    }
}
