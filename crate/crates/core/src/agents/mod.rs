//! Agent roles bound to their templates, parse contracts, and retry policy.
//!
//! Every tagged output gets up to `parse_retry_max` re-asks: the failed
//! reply is echoed back as an assistant turn followed by a format reminder.
//! Bare-text outputs (retrieval, subsection write/refine) are not re-asked.

mod binding;
mod filler;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

pub use binding::{AgentBinding, AgentConfig, AgentRole, OutputSpec, DEFAULT_PARSE_RETRY_MAX};
pub use filler::strip_leading_filler;

use crate::domain::{
    CallLog, Draft, DomainError, GuidelineNode, NodeId, PgTree, Reference, RetrievedContext, ReviewVerdict,
    SectionName, SectionPlan, Verdict,
};
use crate::gateway::{ChatRequest, ChatResponse, Gateway, GatewayError, Message};
use crate::prompts::{extract_numbered, extract_one, numbered_reminder, Bindings, PromptError, PromptRegistry, TagError, TemplateId};

pub const DEFAULT_BACKEND: &str = "default";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("{role}: output unparseable after {attempts} attempts: {source}")]
    Parse {
        role: AgentRole,
        attempts: u32,
        source: TagError,
    },
    #[error("{role}: malformed verdict after {attempts} attempts: {detail}")]
    MalformedVerdict {
        role: AgentRole,
        attempts: u32,
        detail: String,
    },
    #[error("{0}: model returned empty text")]
    EmptyGeneration(AgentRole),
    #[error("reference is incomplete: section \"{0}\" is empty")]
    IncompleteReference(SectionName),
    #[error("node {0} is not part of the guideline tree")]
    NodeNotInTree(NodeId),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no backend named {0:?} is configured")]
    UnknownBackend(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// How the second PGTree layer is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    /// Each first-level section becomes a single guideline node.
    Off,
    /// One planner call per section asks for `<Subsection-j>` blocks.
    #[default]
    PerSectionCall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanOutcome {
    pub tree: PgTree,
    pub warnings: Vec<String>,
}

/// Verdict of the per-question draft quality gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerVerdict {
    pub result: Verdict,
    pub reason: Option<String>,
}

enum ParseFailure {
    Tag(TagError),
    Verdict(String),
    Empty,
}

impl From<TagError> for ParseFailure {
    fn from(e: TagError) -> Self {
        ParseFailure::Tag(e)
    }
}

#[derive(Debug, Clone)]
pub struct Agents {
    bindings: BTreeMap<AgentRole, AgentBinding>,
    gateways: BTreeMap<String, Gateway>,
    registry: Arc<PromptRegistry>,
}

impl Agents {
    /// Every role bound to `gateway` under the name `default`, using the
    /// embedded templates.
    pub fn new(gateway: Gateway, model_id: &str) -> Self {
        let bindings = AgentRole::ALL
            .into_iter()
            .map(|r| (r, AgentBinding::new(r, DEFAULT_BACKEND, model_id)))
            .collect();
        let mut gateways = BTreeMap::new();
        gateways.insert(DEFAULT_BACKEND.to_string(), gateway);
        Self {
            bindings,
            gateways,
            registry: Arc::new(PromptRegistry::embedded().clone()),
        }
    }

    pub fn with_gateway(mut self, name: impl Into<String>, gateway: Gateway) -> Self {
        self.gateways.insert(name.into(), gateway);
        self
    }

    pub fn with_registry(mut self, registry: PromptRegistry) -> Self {
        self.registry = Arc::new(registry);
        self
    }

    pub fn configure(mut self, role: AgentRole, cfg: &AgentConfig) -> Result<Self, AgentError> {
        let b = self.bindings.get_mut(&role).expect("every role is bound");
        b.apply(cfg);
        if !self.gateways.contains_key(&b.backend) {
            return Err(AgentError::UnknownBackend(b.backend.clone()));
        }
        Ok(self)
    }

    pub fn binding(&self, role: AgentRole) -> &AgentBinding {
        &self.bindings[&role]
    }

    pub fn bindings(&self) -> impl Iterator<Item = &AgentBinding> {
        self.bindings.values()
    }

    fn gateway(&self, b: &AgentBinding) -> Result<&Gateway, AgentError> {
        self.gateways
            .get(&b.backend)
            .ok_or_else(|| AgentError::UnknownBackend(b.backend.clone()))
    }

    fn render(&self, id: TemplateId, bindings: &Bindings) -> Result<String, AgentError> {
        Ok(self.registry.render(id, bindings)?)
    }

    fn request(&self, b: &AgentBinding, messages: Vec<Message>, parse_retry: u32) -> ChatRequest {
        let mut req = ChatRequest::new(b.model_id.clone(), b.role.as_str(), messages).with_sampling(b.sampling);
        req.parse_retry = parse_retry;
        req
    }

    /// One call, no parsing.
    pub fn ask_raw(&self, role: AgentRole, prompt: String, log: &CallLog) -> Result<ChatResponse, AgentError> {
        let b = self.binding(role);
        let resp = self.gateway(b)?.complete(&self.request(b, vec![Message::user(prompt)], 0), log)?;
        if resp.is_overlong() {
            warn!(role = %role, "response hit the max_tokens limit");
        }
        Ok(resp)
    }

    fn ask<T>(
        &self,
        role: AgentRole,
        prompt: String,
        reminder: &str,
        log: &CallLog,
        parse: impl Fn(&str) -> Result<T, ParseFailure>,
    ) -> Result<T, AgentError> {
        let b = self.binding(role);
        let gw = self.gateway(b)?;
        let mut messages = vec![Message::user(prompt)];
        let mut attempt = 0u32;
        loop {
            let resp = gw.complete(&self.request(b, messages.clone(), attempt), log)?;
            match parse(&resp.content) {
                Ok(v) => return Ok(v),
                Err(fail) if attempt >= b.parse_retry_max => {
                    let attempts = attempt + 1;
                    return Err(match fail {
                        ParseFailure::Tag(source) => AgentError::Parse { role, attempts, source },
                        ParseFailure::Verdict(detail) => AgentError::MalformedVerdict { role, attempts, detail },
                        ParseFailure::Empty => AgentError::EmptyGeneration(role),
                    });
                }
                Err(_) => {
                    warn!(role = %role, attempt, "output did not follow the format; re-asking");
                    messages.push(Message::assistant(resp.content));
                    messages.push(Message::user(reminder));
                    attempt += 1;
                }
            }
        }
    }

    fn ask_tag(&self, role: AgentRole, tag: &str, prompt: String, log: &CallLog) -> Result<String, AgentError> {
        let reminder = crate::prompts::TagSpec::one(tag).format_reminder();
        self.ask(role, prompt, &reminder, log, |out| {
            let inner = extract_one(out, tag)?;
            if inner.is_empty() {
                Err(ParseFailure::Empty)
            } else {
                Ok(inner)
            }
        })
    }

    fn ask_numbered(
        &self,
        role: AgentRole,
        prefix: &str,
        prompt: String,
        log: &CallLog,
    ) -> Result<Vec<(usize, String)>, AgentError> {
        self.ask(role, prompt, &numbered_reminder(prefix), log, |out| {
            let blocks = extract_numbered(out, prefix)?;
            if blocks.iter().any(|(_, t)| t.is_empty()) {
                return Err(ParseFailure::Empty);
            }
            Ok(blocks)
        })
    }

    /// Step I: one short component (title, abstract, background, summary,
    /// or claims) from the draft. Returns the tag's inner text, trimmed.
    pub fn write_component(&self, role: AgentRole, draft: &Draft, log: &CallLog) -> Result<String, AgentError> {
        let section = role
            .section()
            .ok_or_else(|| AgentError::Precondition(format!("{role} is not a component writer")))?;
        let prompt = self.render(role.template(), &Bindings::new().with("draft", draft.render()))?;
        self.ask_tag(role, section.label(), prompt, log)
    }

    /// Step II, first layer: `<Section-k>` guidelines.
    pub fn plan_first_level(&self, draft: &Draft, log: &CallLog) -> Result<Vec<(usize, String)>, AgentError> {
        let prompt = self.render(TemplateId::Planner, &Bindings::new().with("draft", draft.render()))?;
        self.ask_numbered(AgentRole::Planner, "Section", prompt, log)
    }

    /// Step II, second layer for section `k`: `<Subsection-j>` guidelines.
    pub fn expand_section(
        &self,
        draft: &Draft,
        first_level: &[(usize, String)],
        k: usize,
        log: &CallLog,
    ) -> Result<Vec<String>, AgentError> {
        let guideline = first_level
            .iter()
            .find(|(i, _)| *i == k)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| AgentError::Precondition(format!("no first-level section {k}")))?;
        let prompt = self.render(
            TemplateId::PlannerExpand,
            &Bindings::new()
                .with("draft", draft.render())
                .with("pgtree_overview", first_level_overview(first_level))
                .with("section_index", k.to_string())
                .with("section_guideline", guideline),
        )?;
        let blocks = self.ask_numbered(AgentRole::Planner, "Subsection", prompt, log)?;
        Ok(blocks.into_iter().map(|(_, t)| t).collect())
    }

    /// Builds the two-layer tree from a first-level list. With expansion on,
    /// a section whose expansion fails falls back to a single node and a
    /// warning; transport errors still abort.
    pub fn expand(
        &self,
        draft: &Draft,
        first_level: &[(usize, String)],
        expansion: Expansion,
        log: &CallLog,
    ) -> Result<PlanOutcome, AgentError> {
        if first_level.is_empty() {
            return Err(AgentError::Precondition("first-level section list is empty".into()));
        }
        let mut warnings = Vec::new();
        let mut sections = Vec::with_capacity(first_level.len());
        for (k, overview) in first_level {
            let subs = match expansion {
                Expansion::Off => vec![overview.clone()],
                Expansion::PerSectionCall => match self.expand_section(draft, first_level, *k, log) {
                    Ok(subs) => subs,
                    Err(e @ (AgentError::Parse { .. } | AgentError::EmptyGeneration(_))) => {
                        let w = format!("section {k}: expansion failed ({e}); using a single subsection");
                        warn!("{w}");
                        warnings.push(w);
                        vec![overview.clone()]
                    }
                    Err(e) => return Err(e),
                },
            };
            sections.push(SectionPlan {
                section_index: *k,
                section_overview: overview.clone(),
                subsections: subs
                    .into_iter()
                    .enumerate()
                    .map(|(j, g)| GuidelineNode {
                        section_index: *k,
                        subsection_index: j + 1,
                        guideline_text: g,
                    })
                    .collect(),
            });
        }
        Ok(PlanOutcome {
            tree: PgTree::new(sections)?,
            warnings,
        })
    }

    /// Full Step II: first layer, then expansion.
    pub fn plan(&self, draft: &Draft, expansion: Expansion, log: &CallLog) -> Result<PlanOutcome, AgentError> {
        let first = self.plan_first_level(draft, log)?;
        self.expand(draft, &first, expansion, log)
    }

    /// Prompt-based extraction of what the node needs from the reference.
    /// A blank reply is flagged, not rejected.
    pub fn retrieve(
        &self,
        node: &GuidelineNode,
        reference: &Reference,
        log: &CallLog,
    ) -> Result<RetrievedContext, AgentError> {
        if let Some(missing) = reference.first_missing() {
            return Err(AgentError::IncompleteReference(missing));
        }
        let prompt = self.render(
            TemplateId::Retrieval,
            &Bindings::new()
                .with("reference", reference.render())
                .with("guideline", node.guideline_text.clone()),
        )?;
        let resp = self.ask_raw(AgentRole::Description, prompt, log)?;
        Ok(RetrievedContext::new(node.id(), resp.content, reference))
    }

    /// Drafts one subsection. The draft is already represented in the
    /// retrieved context, so the write prompt does not bind it separately.
    pub fn write_subsection(
        &self,
        node: &GuidelineNode,
        retrieved: &RetrievedContext,
        tree: &PgTree,
        _draft: &Draft,
        log: &CallLog,
    ) -> Result<String, AgentError> {
        if !tree.contains(node) {
            return Err(AgentError::NodeNotInTree(node.id()));
        }
        let prompt = self.render(
            TemplateId::DescriptionWrite,
            &Bindings::new()
                .with("retrieved", retrieved.content.clone())
                .with("pgtree_overview", tree.render())
                .with("guideline", node.guideline_text.clone()),
        )?;
        self.bare_text(AgentRole::Description, prompt, log)
    }

    fn bare_text(&self, role: AgentRole, prompt: String, log: &CallLog) -> Result<String, AgentError> {
        let resp = self.ask_raw(role, prompt, log)?;
        let text = strip_leading_filler(&resp.content);
        if text.is_empty() {
            return Err(AgentError::EmptyGeneration(role));
        }
        Ok(text)
    }

    /// Examiner review of one subsection against its guideline and the draft.
    pub fn review(
        &self,
        node: &GuidelineNode,
        text: &str,
        draft: &Draft,
        log: &CallLog,
    ) -> Result<ReviewVerdict, AgentError> {
        if text.trim().is_empty() {
            return Err(AgentError::Precondition("cannot review an empty subsection".into()));
        }
        let prompt = self.render(
            TemplateId::ExaminerReview,
            &Bindings::new()
                .with("draft", draft.render())
                .with("guideline", node.guideline_text.clone())
                .with("subsection", text),
        )?;
        let reminder = "Your previous reply did not follow the required output format. Reply again with \
                        <Result>Pass</Result> or <Result>Fail</Result>, followed by your advice inside \
                        <Advice></Advice> tags.";
        self.ask(AgentRole::Examiner, prompt, reminder, log, |out| {
            let result = parse_verdict(out)?;
            let advice = extract_one(out, "Advice").map_err(|e| ParseFailure::Verdict(e.to_string()))?;
            ReviewVerdict::new(result, advice).map_err(|e| ParseFailure::Verdict(e.to_string()))
        })
    }

    /// Revises a subsection according to examiner feedback.
    pub fn refine(
        &self,
        node: &GuidelineNode,
        text: &str,
        feedback: &str,
        tree: &PgTree,
        log: &CallLog,
    ) -> Result<String, AgentError> {
        if feedback.trim().is_empty() {
            return Err(AgentError::Precondition("refinement feedback is empty".into()));
        }
        let prompt = self.render(
            TemplateId::DescriptionRefine,
            &Bindings::new()
                .with("pgtree_overview", tree.render())
                .with("guideline", node.guideline_text.clone())
                .with("subsection", text)
                .with("feedback", feedback),
        )?;
        self.bare_text(AgentRole::Description, prompt, log)
    }

    /// Simulated inventor answering canonical question `question_id` about
    /// the given patent text.
    pub fn inventor_answer(&self, patent_text: &str, question_id: u8, log: &CallLog) -> Result<String, AgentError> {
        let id = TemplateId::inventor(question_id)
            .ok_or_else(|| AgentError::Precondition(format!("unknown question id {question_id}")))?;
        let prompt = self.render(id, &Bindings::new().with("patent", patent_text))?;
        self.ask_tag(AgentRole::Inventor, "Answer", prompt, log)
    }

    /// Quality gate on one draft answer using reviewer template `template_q`.
    /// A Fail must carry a non-empty reason.
    pub fn review_answer(&self, template_q: u8, answer: &str, log: &CallLog) -> Result<AnswerVerdict, AgentError> {
        let id = TemplateId::draft_quality(template_q)
            .ok_or_else(|| AgentError::Precondition(format!("unknown question id {template_q}")))?;
        let prompt = self.render(id, &Bindings::new().with("answer", answer))?;
        let reminder = "Your previous reply did not follow the required output format. Reply again with \
                        <Result> Pass </Result> or <Result> Fail </Result>; a Fail must include \
                        <Reason></Reason>.";
        self.ask(AgentRole::DraftExaminer, prompt, reminder, log, |out| {
            let result = parse_verdict(out)?;
            let reason = match extract_one(out, "Reason") {
                Ok(r) if !r.is_empty() => Some(r),
                _ => None,
            };
            if result == Verdict::Fail && reason.is_none() {
                return Err(ParseFailure::Verdict("Fail without <Reason>".into()));
            }
            Ok(AnswerVerdict { result, reason })
        })
    }

    /// First-level guideline list summarized from an existing description.
    pub fn collect_sections(&self, description: &str, log: &CallLog) -> Result<Vec<(usize, String)>, AgentError> {
        if description.trim().is_empty() {
            return Err(AgentError::Precondition("description is empty".into()));
        }
        let prompt = self.render(TemplateId::PgtreeCollect, &Bindings::new().with("description", description))?;
        self.ask_numbered(AgentRole::PgtreeCollector, "Section", prompt, log)
    }

    /// The single-call end-to-end baseline; the reply is returned unparsed.
    pub fn zero_shot(&self, draft: &Draft, log: &CallLog) -> Result<ChatResponse, AgentError> {
        let prompt = self.render(TemplateId::ZeroShotFull, &Bindings::new().with("draft", draft.render()))?;
        self.ask_raw(AgentRole::ZeroShot, prompt, log)
    }
}

fn parse_verdict(out: &str) -> Result<Verdict, ParseFailure> {
    let raw = extract_one(out, "Result").map_err(|e| ParseFailure::Verdict(e.to_string()))?;
    match raw.as_str() {
        "Pass" => Ok(Verdict::Pass),
        "Fail" => Ok(Verdict::Fail),
        other => Err(ParseFailure::Verdict(format!("result {other:?} is neither Pass nor Fail"))),
    }
}

/// "Section k: text" lines for the first layer only.
pub fn first_level_overview(first_level: &[(usize, String)]) -> String {
    first_level
        .iter()
        .map(|(k, t)| format!("Section {k}: {t}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests;
