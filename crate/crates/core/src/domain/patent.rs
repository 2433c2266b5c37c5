//! The assembled patent document and its two serializations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run_record::RunRecord;
use super::DomainError;

pub const PATENT_SCHEMA_VERSION: u32 = 1;
const TEXT_PREAMBLE: &str = "patent-document schema_version=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionName {
    Title,
    Abstract,
    Background,
    Summary,
    Claims,
    Description,
}

impl SectionName {
    pub const ALL: [SectionName; 6] = [
        SectionName::Title,
        SectionName::Abstract,
        SectionName::Background,
        SectionName::Summary,
        SectionName::Claims,
        SectionName::Description,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SectionName::Title => "title",
            SectionName::Abstract => "abstract",
            SectionName::Background => "background",
            SectionName::Summary => "summary",
            SectionName::Claims => "claims",
            SectionName::Description => "description",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SectionName::Title => "Title",
            SectionName::Abstract => "Abstract",
            SectionName::Background => "Background",
            SectionName::Summary => "Summary",
            SectionName::Claims => "Claims",
            SectionName::Description => "Description",
        }
    }

    fn header(self) -> String {
        format!("== {} ==", self.label())
    }
}

impl fmt::Display for SectionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SectionName {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let key = match lower.as_str() {
            "t" => "title",
            "a" => "abstract",
            "b" => "background",
            "s" => "summary",
            "c" => "claims",
            "d" | "detailed description" | "full description" => "description",
            other => other,
        };
        SectionName::ALL
            .into_iter()
            .find(|n| n.key() == key)
            .ok_or_else(|| DomainError::InvalidOrder(format!("unknown section name {s:?}")))
    }
}

/// A permutation of the six sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SectionName>", into = "Vec<SectionName>")]
pub struct SectionOrder(Vec<SectionName>);

impl SectionOrder {
    pub fn new(order: Vec<SectionName>) -> Result<Self, DomainError> {
        let mut sorted = order.clone();
        sorted.sort();
        sorted.dedup();
        if order.len() != 6 || sorted.len() != 6 {
            return Err(DomainError::InvalidOrder(format!(
                "section order must list each of the six sections once, got {order:?}"
            )));
        }
        Ok(Self(order))
    }

    /// Title, abstract, background, summary, description, claims.
    pub fn description_before_claims() -> Self {
        use SectionName::*;
        Self(vec![Title, Abstract, Background, Summary, Description, Claims])
    }

    /// Title, abstract, background, summary, claims, description.
    pub fn claims_before_description() -> Self {
        use SectionName::*;
        Self(vec![Title, Abstract, Background, Summary, Claims, Description])
    }

    pub fn as_slice(&self) -> &[SectionName] {
        &self.0
    }

    pub fn position(&self, name: SectionName) -> usize {
        self.0.iter().position(|n| *n == name).expect("order is a permutation")
    }
}

impl Default for SectionOrder {
    fn default() -> Self {
        Self::description_before_claims()
    }
}

impl TryFrom<Vec<SectionName>> for SectionOrder {
    type Error = DomainError;

    fn try_from(v: Vec<SectionName>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<SectionOrder> for Vec<SectionName> {
    fn from(o: SectionOrder) -> Self {
        o.0
    }
}

impl FromStr for SectionOrder {
    type Err = DomainError;

    /// Comma-separated names, e.g. `T,A,B,S,C,D` or `title,abstract,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let names = s
            .split(',')
            .map(SectionName::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentDoc {
    pub schema_version: u32,
    pub status: DocStatus,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub background: String,
    pub summary: String,
    pub claims: String,
    pub description: String,
    pub section_order: SectionOrder,
    pub generation_meta: RunRecord,
}

/// Sections as stored separately, one per name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionTexts {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub background: String,
    pub summary: String,
    pub claims: String,
    pub description: String,
}

impl SectionTexts {
    pub fn get(&self, name: SectionName) -> &str {
        match name {
            SectionName::Title => &self.title,
            SectionName::Abstract => &self.abstract_text,
            SectionName::Background => &self.background,
            SectionName::Summary => &self.summary,
            SectionName::Claims => &self.claims,
            SectionName::Description => &self.description,
        }
    }

    pub fn set(&mut self, name: SectionName, text: String) {
        let slot = match name {
            SectionName::Title => &mut self.title,
            SectionName::Abstract => &mut self.abstract_text,
            SectionName::Background => &mut self.background,
            SectionName::Summary => &mut self.summary,
            SectionName::Claims => &mut self.claims,
            SectionName::Description => &mut self.description,
        };
        *slot = text;
    }

    pub fn missing(&self) -> Vec<SectionName> {
        SectionName::ALL
            .into_iter()
            .filter(|n| self.get(*n).trim().is_empty())
            .collect()
    }
}

/// Stores the six sections separately with the given order.
///
/// Argument order follows the component writers: title, abstract,
/// background, summary, claims, then the description.
pub fn assemble_patent(
    title: &str,
    abstract_text: &str,
    background: &str,
    summary: &str,
    claims: &str,
    description: &str,
    order: SectionOrder,
) -> Result<PatentDoc, DomainError> {
    let texts = SectionTexts {
        title: title.to_string(),
        abstract_text: abstract_text.to_string(),
        background: background.to_string(),
        summary: summary.to_string(),
        claims: claims.to_string(),
        description: description.to_string(),
    };
    PatentDoc::from_sections(texts, order, RunRecord::default())
}

impl PatentDoc {
    pub fn from_sections(
        texts: SectionTexts,
        order: SectionOrder,
        meta: RunRecord,
    ) -> Result<Self, DomainError> {
        if let Some(name) = texts.missing().first() {
            return Err(DomainError::EmptySection(*name));
        }
        Ok(Self::build(texts, order, meta, DocStatus::Complete))
    }

    /// A document that may have empty sections (aborted runs, baselines).
    pub fn partial(texts: SectionTexts, order: SectionOrder, meta: RunRecord) -> Self {
        let status = if texts.missing().is_empty() {
            DocStatus::Complete
        } else {
            DocStatus::Partial
        };
        Self::build(texts, order, meta, status)
    }

    fn build(texts: SectionTexts, order: SectionOrder, meta: RunRecord, status: DocStatus) -> Self {
        Self {
            schema_version: PATENT_SCHEMA_VERSION,
            status,
            title: texts.title,
            abstract_text: texts.abstract_text,
            background: texts.background,
            summary: texts.summary,
            claims: texts.claims,
            description: texts.description,
            section_order: order,
            generation_meta: meta,
        }
    }

    pub fn section(&self, name: SectionName) -> &str {
        match name {
            SectionName::Title => &self.title,
            SectionName::Abstract => &self.abstract_text,
            SectionName::Background => &self.background,
            SectionName::Summary => &self.summary,
            SectionName::Claims => &self.claims,
            SectionName::Description => &self.description,
        }
    }

    pub fn sections(&self) -> SectionTexts {
        let mut t = SectionTexts::default();
        for n in SectionName::ALL {
            t.set(n, self.section(n).to_string());
        }
        t
    }

    pub fn is_complete(&self) -> bool {
        self.status == DocStatus::Complete
    }

    /// Section bodies in order, separated by blank lines, without headers.
    pub fn body_text(&self) -> String {
        self.section_order
            .as_slice()
            .iter()
            .map(|n| self.section(*n))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    /// Plain-text serialization: a preamble line, then one `== Label ==`
    /// header per section in `section_order`, each followed by its text.
    pub fn to_text(&self) -> String {
        let blocks: Vec<String> = self
            .section_order
            .as_slice()
            .iter()
            .map(|n| format!("{}\n{}\n", n.header(), self.section(*n)))
            .collect();
        format!("{TEXT_PREAMBLE}\n{}", blocks.join("\n"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("patent serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DomainError> {
        serde_json::from_str(s).map_err(|e| DomainError::Parse(e.to_string()))
    }
}

/// Sections and their order recovered from [`PatentDoc::to_text`] output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPatentText {
    pub sections: SectionTexts,
    pub order: Vec<SectionName>,
}

/// Inverse of [`PatentDoc::to_text`]. Section bodies must not themselves
/// contain a header line.
pub fn parse_patent_text(doc: &str) -> Result<ParsedPatentText, DomainError> {
    let rest = doc
        .strip_prefix(TEXT_PREAMBLE)
        .and_then(|r| r.strip_prefix('\n'))
        .ok_or_else(|| DomainError::Parse("missing patent-document preamble".into()))?;
    let mut heads: Vec<(usize, usize, SectionName)> = Vec::new();
    let mut offset = 0;
    for line in rest.split_inclusive('\n') {
        let bare = line.strip_suffix('\n').unwrap_or(line);
        if let Some(name) = SectionName::ALL.into_iter().find(|n| bare == n.header()) {
            heads.push((offset, offset + line.len(), name));
        }
        offset += line.len();
    }
    if heads.is_empty() {
        return Err(DomainError::Parse("no section headers found".into()));
    }
    let mut sections = SectionTexts::default();
    let mut order = Vec::new();
    for (k, &(_, body_start, name)) in heads.iter().enumerate() {
        let body_end = match heads.get(k + 1) {
            Some(&(next, _, _)) => next.checked_sub(2),
            None => rest.len().checked_sub(1),
        }
        .filter(|&e| e >= body_start)
        .ok_or_else(|| DomainError::Parse(format!("malformed block for {name}")))?;
        if order.contains(&name) {
            return Err(DomainError::Parse(format!("section {name} appears twice")));
        }
        sections.set(name, rest[body_start..body_end].to_string());
        order.push(name);
    }
    Ok(ParsedPatentText { sections, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(order: SectionOrder) -> PatentDoc {
        assemble_patent("T", "A", "B", "S", "C", "D", order).unwrap()
    }

    #[test]
    fn default_order_puts_description_before_claims() {
        let text = doc(SectionOrder::default()).to_text();
        assert!(text.find("== Description ==").unwrap() < text.find("== Claims ==").unwrap());
    }

    #[test]
    fn overridden_order_puts_claims_first() {
        let order: SectionOrder = "T,A,B,S,C,D".parse().unwrap();
        let text = doc(order).to_text();
        assert!(text.find("== Claims ==").unwrap() < text.find("== Description ==").unwrap());
    }

    #[test]
    fn empty_claims_rejected() {
        let err = assemble_patent("T", "A", "B", "S", "", "D", SectionOrder::default()).unwrap_err();
        assert_eq!(err, DomainError::EmptySection(SectionName::Claims));
        assert_eq!(err.to_string(), "section \"claims\" is empty");
    }

    #[test]
    fn text_round_trip() {
        let p = assemble_patent(
            "A Pump",
            "An abstract.\nTwo lines.",
            "Background\n\nwith blank line",
            "Summary",
            "1. A pump.\n2. The pump of claim 1.",
            "Body\n",
            SectionOrder::default(),
        )
        .unwrap();
        let parsed = parse_patent_text(&p.to_text()).unwrap();
        assert_eq!(parsed.sections, p.sections());
        assert_eq!(parsed.order, p.section_order.as_slice());
    }

    #[test]
    fn json_round_trip() {
        let p = doc(SectionOrder::claims_before_description());
        let back = PatentDoc::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["abstract"], "A");
        assert_eq!(v["section_order"][4], "claims");
    }

    #[test]
    fn bad_orders_rejected() {
        assert!("T,A,B,S,C".parse::<SectionOrder>().is_err());
        assert!("T,A,B,S,C,C".parse::<SectionOrder>().is_err());
        assert!("T,A,B,S,X,D".parse::<SectionOrder>().is_err());
    }
}
