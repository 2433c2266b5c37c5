use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Sampling, SectionName};
use crate::prompts::{TagSpec, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Title,
    Abstract,
    Background,
    Summary,
    Claims,
    Description,
    Planner,
    Examiner,
    /// Simulated inventor answering the five draft questions.
    Inventor,
    /// Per-question draft quality gate.
    DraftExaminer,
    /// Summarizes an existing description into a first-level guideline list.
    PgtreeCollector,
    /// Single-call end-to-end baseline.
    ZeroShot,
}

impl AgentRole {
    pub const ALL: [AgentRole; 12] = [
        AgentRole::Title,
        AgentRole::Abstract,
        AgentRole::Background,
        AgentRole::Summary,
        AgentRole::Claims,
        AgentRole::Description,
        AgentRole::Planner,
        AgentRole::Examiner,
        AgentRole::Inventor,
        AgentRole::DraftExaminer,
        AgentRole::PgtreeCollector,
        AgentRole::ZeroShot,
    ];

    /// The five short-component writers, in Step I order.
    pub const COMPONENTS: [AgentRole; 5] = [
        AgentRole::Title,
        AgentRole::Abstract,
        AgentRole::Background,
        AgentRole::Summary,
        AgentRole::Claims,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::Title => "title",
            AgentRole::Abstract => "abstract",
            AgentRole::Background => "background",
            AgentRole::Summary => "summary",
            AgentRole::Claims => "claims",
            AgentRole::Description => "description",
            AgentRole::Planner => "planner",
            AgentRole::Examiner => "examiner",
            AgentRole::Inventor => "inventor",
            AgentRole::DraftExaminer => "draft_examiner",
            AgentRole::PgtreeCollector => "pgtree_collector",
            AgentRole::ZeroShot => "zero_shot",
        }
    }

    pub fn is_component(self) -> bool {
        Self::COMPONENTS.contains(&self)
    }

    /// Section produced by a component writer.
    pub fn section(self) -> Option<SectionName> {
        Some(match self {
            AgentRole::Title => SectionName::Title,
            AgentRole::Abstract => SectionName::Abstract,
            AgentRole::Background => SectionName::Background,
            AgentRole::Summary => SectionName::Summary,
            AgentRole::Claims => SectionName::Claims,
            _ => return None,
        })
    }

    /// Main template of the role. The planner's expansion call, the
    /// description refine call, and the per-question templates are chosen
    /// by the operation.
    pub fn template(self) -> TemplateId {
        match self {
            AgentRole::Title => TemplateId::TitleWriter,
            AgentRole::Abstract => TemplateId::AbstractWriter,
            AgentRole::Background => TemplateId::BackgroundWriter,
            AgentRole::Summary => TemplateId::SummaryWriter,
            AgentRole::Claims => TemplateId::ClaimsWriter,
            AgentRole::Description => TemplateId::DescriptionWrite,
            AgentRole::Planner => TemplateId::Planner,
            AgentRole::Examiner => TemplateId::ExaminerReview,
            AgentRole::Inventor => TemplateId::InventorQ1,
            AgentRole::DraftExaminer => TemplateId::DraftQualityQ1,
            AgentRole::PgtreeCollector => TemplateId::PgtreeCollect,
            AgentRole::ZeroShot => TemplateId::ZeroShotFull,
        }
    }

    pub fn output_spec(self) -> OutputSpec {
        match self {
            AgentRole::Title => OutputSpec::Tag(TagSpec::one("Title")),
            AgentRole::Abstract => OutputSpec::Tag(TagSpec::one("Abstract")),
            AgentRole::Background => OutputSpec::Tag(TagSpec::one("Background")),
            AgentRole::Summary => OutputSpec::Tag(TagSpec::one("Summary")),
            AgentRole::Claims => OutputSpec::Tag(TagSpec::one("Claims")),
            AgentRole::Description => OutputSpec::Raw,
            AgentRole::Planner | AgentRole::PgtreeCollector => OutputSpec::Numbered("Section".into()),
            AgentRole::Examiner => OutputSpec::Tag(TagSpec::one("Result")),
            AgentRole::Inventor => OutputSpec::Tag(TagSpec::one("Answer")),
            AgentRole::DraftExaminer => OutputSpec::Tag(TagSpec::one("Result")),
            AgentRole::ZeroShot => OutputSpec::Tag(TagSpec::one("Patent")),
        }
    }

    pub fn default_sampling(self) -> Sampling {
        let max_tokens = match self {
            AgentRole::Description => 8192,
            AgentRole::ZeroShot => 16_384,
            _ => 4096,
        };
        Sampling {
            max_tokens,
            ..Sampling::default()
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown agent role {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSpec {
    Tag(TagSpec),
    /// `<{prefix}-k>` blocks numbered from 1.
    Numbered(String),
    /// Bare text; only trimming and the leading-filler policy apply.
    Raw,
}

pub const DEFAULT_PARSE_RETRY_MAX: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBinding {
    pub role: AgentRole,
    pub template_id: TemplateId,
    pub output_spec: OutputSpec,
    /// Name of the gateway this role talks to.
    pub backend: String,
    pub model_id: String,
    pub sampling: Sampling,
    pub parse_retry_max: u32,
}

impl AgentBinding {
    pub fn new(role: AgentRole, backend: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            role,
            template_id: role.template(),
            output_spec: role.output_spec(),
            backend: backend.into(),
            model_id: model_id.into(),
            sampling: role.default_sampling(),
            parse_retry_max: DEFAULT_PARSE_RETRY_MAX,
        }
    }

    pub fn apply(&mut self, cfg: &AgentConfig) {
        if let Some(b) = &cfg.backend {
            self.backend = b.clone();
        }
        if let Some(m) = &cfg.model_id {
            self.model_id = m.clone();
        }
        if let Some(t) = cfg.temperature {
            self.sampling.temperature = t;
        }
        if let Some(p) = cfg.top_p {
            self.sampling.top_p = p;
        }
        if let Some(n) = cfg.max_tokens {
            self.sampling.max_tokens = n;
        }
        if let Some(r) = cfg.parse_retry_max {
            self.parse_retry_max = r;
        }
    }
}

/// Per-role overrides, e.g. `[agents.description]` in a run config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    #[serde(default)]
    pub backend: Option<String>,
    #[serde(default)]
    pub model_id: Option<String>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub top_p: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    #[serde(default)]
    pub parse_retry_max: Option<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn component_templates_are_distinct() {
        let ids: BTreeSet<_> = AgentRole::COMPONENTS.iter().map(|r| r.template()).collect();
        assert_eq!(ids.len(), 5);
    }

    #[test]
    fn role_names_round_trip() {
        for r in AgentRole::ALL {
            assert_eq!(r.as_str().parse::<AgentRole>().unwrap(), r);
        }
    }

    #[test]
    fn overrides_apply() {
        let mut b = AgentBinding::new(AgentRole::Description, "default", "m");
        assert_eq!(b.sampling.max_tokens, 8192);
        b.apply(&AgentConfig {
            model_id: Some("ft-7b".into()),
            temperature: Some(0.2),
            ..AgentConfig::default()
        });
        assert_eq!(b.model_id, "ft-7b");
        assert_eq!(b.sampling.temperature, 0.2);
        assert_eq!(b.sampling.top_p, 0.9);
    }
}
