//! End-to-end generation: short components, guideline tree, then the
//! retrieve / write / review / refine loop per subsection, and assembly.

mod run_dir;

use std::thread;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{info, warn};

pub use run_dir::{RunDir, RunStatus, RUN_DIR_SCHEMA_VERSION};

use crate::agents::{AgentError, AgentRole, Agents, Expansion, PlanOutcome};
use crate::domain::{
    CallLog, CallLogEntry, DocStatus, Draft, DomainError, GuidelineNode, PatentDoc, PgTree, Reference, ReviewVerdict,
    RoundRecord, RunRecord, Sampling, SectionOrder, SectionTexts, SubsectionDraft, SubsectionStatus,
    Verdict,
};

pub const UNPARSEABLE_VERDICT: &str = "examiner verdict unparseable";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_rounds")]
    pub max_refine_rounds: u32,
    #[serde(default)]
    pub pgtree_expansion: Expansion,
    #[serde(default = "one")]
    pub parallel_subsections: usize,
    /// Run the five component writers concurrently.
    #[serde(default = "yes")]
    pub parallel_components: bool,
    #[serde(default)]
    pub section_order: SectionOrder,
    #[serde(default)]
    pub seed: u64,
}

fn default_rounds() -> u32 {
    3
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_refine_rounds: default_rounds(),
            pgtree_expansion: Expansion::default(),
            parallel_subsections: 1,
            parallel_components: true,
            section_order: SectionOrder::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.parallel_subsections == 0 {
            return Err(PipelineError::Config("parallel_subsections must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("pipeline config: {0}")]
    Config(String),
    #[error("run directory: {0}")]
    Io(String),
}

/// The five short components produced in Step I.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub background: String,
    pub summary: String,
    pub claims: String,
}

impl Components {
    pub fn get(&self, role: AgentRole) -> Option<&str> {
        Some(match role {
            AgentRole::Title => &self.title,
            AgentRole::Abstract => &self.abstract_text,
            AgentRole::Background => &self.background,
            AgentRole::Summary => &self.summary,
            AgentRole::Claims => &self.claims,
            _ => return None,
        })
    }

    fn set(&mut self, role: AgentRole, text: String) {
        match role {
            AgentRole::Title => self.title = text,
            AgentRole::Abstract => self.abstract_text = text,
            AgentRole::Background => self.background = text,
            AgentRole::Summary => self.summary = text,
            AgentRole::Claims => self.claims = text,
            _ => {}
        }
    }

    fn to_sections(&self) -> SectionTexts {
        SectionTexts {
            title: self.title.clone(),
            abstract_text: self.abstract_text.clone(),
            background: self.background.clone(),
            summary: self.summary.clone(),
            claims: self.claims.clone(),
            description: String::new(),
        }
    }
}

/// Bundles the five components with the draft; every component must be
/// non-empty.
pub fn build_reference(components: &Components, draft: &Draft) -> Result<Reference, DomainError> {
    let r = Reference {
        title: components.title.clone(),
        abstract_text: components.abstract_text.clone(),
        background: components.background.clone(),
        summary: components.summary.clone(),
        claims: components.claims.clone(),
        draft: draft.clone(),
    };
    r.validate()?;
    Ok(r)
}

/// Second-layer expansion of a first-level plan; see [`Agents::expand`].
pub fn expand_pgtree(
    agents: &Agents,
    draft: &Draft,
    first_level: &[(usize, String)],
    cfg: &PipelineConfig,
    log: &CallLog,
) -> Result<PlanOutcome, AgentError> {
    agents.expand(draft, first_level, cfg.pgtree_expansion, log)
}

/// Joins accepted subsection texts with single blank lines.
pub fn join_description(subsections: &[SubsectionDraft]) -> String {
    subsections
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub patent: PatentDoc,
    pub components: Components,
    pub tree: PgTree,
    pub subsections: Vec<SubsectionDraft>,
    pub warnings: Vec<String>,
}

/// Stage reached when a run aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Components,
    Planning,
    Description,
    Assembly,
}

/// Everything finished before an abort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialRun {
    pub stage: Stage,
    pub components: Components,
    pub tree: Option<PgTree>,
    pub subsections: Vec<SubsectionDraft>,
    pub warnings: Vec<String>,
    pub calls: Vec<CallLogEntry>,
}

impl PartialRun {
    pub fn patent(&self, order: SectionOrder, meta: RunRecord) -> PatentDoc {
        let mut texts = self.components.to_sections();
        texts.description = join_description(&self.subsections);
        let mut doc = PatentDoc::partial(texts, order, meta);
        // Some subsections may be missing even when every section has text.
        doc.status = DocStatus::Partial;
        doc
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("run aborted during {stage:?}: {error}", stage = partial.stage)]
pub struct RunFailure {
    pub error: PipelineError,
    pub partial: Box<PartialRun>,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    agents: Agents,
    cfg: PipelineConfig,
}

impl Pipeline {
    pub fn new(agents: Agents, cfg: PipelineConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        Ok(Self { agents, cfg })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn agents(&self) -> &Agents {
        &self.agents
    }

    fn record(&self, calls: Vec<CallLogEntry>) -> RunRecord {
        let b = self.agents.binding(AgentRole::Description);
        RunRecord {
            model_id: b.model_id.clone(),
            sampling: Sampling::default(),
            calls,
            seed: self.cfg.seed,
        }
    }

    /// Runs the whole pipeline. On a hard agent error the returned failure
    /// carries everything completed so far.
    pub fn run(&self, draft: &Draft) -> Result<RunOutcome, RunFailure> {
        let log = CallLog::new();
        let mut partial = PartialRun {
            stage: Stage::Components,
            components: Components::default(),
            tree: None,
            subsections: Vec::new(),
            warnings: Vec::new(),
            calls: Vec::new(),
        };
        let fail = |error: PipelineError, mut partial: PartialRun, log: &CallLog| {
            partial.calls = log.snapshot();
            RunFailure {
                error,
                partial: Box::new(partial),
            }
        };

        // Step I
        match self.write_components(draft, &log) {
            Ok(c) => partial.components = c,
            Err(boxed) => {
                let (c, e) = *boxed;
                partial.components = c;
                return Err(fail(e.into(), partial, &log));
            }
        }
        let reference = match build_reference(&partial.components, draft) {
            Ok(r) => r,
            Err(e) => return Err(fail(e.into(), partial, &log)),
        };

        // Step II
        partial.stage = Stage::Planning;
        let plan = match self.agents.plan(draft, self.cfg.pgtree_expansion, &log) {
            Ok(p) => p,
            Err(e) => return Err(fail(e.into(), partial, &log)),
        };
        partial.warnings.extend(plan.warnings);
        let tree = plan.tree;
        partial.tree = Some(tree.clone());
        info!(shape = ?tree.shape(), "guideline tree ready");

        // Step III
        partial.stage = Stage::Description;
        let nodes: Vec<&GuidelineNode> = tree.nodes().collect();
        let results = self.describe_nodes(&nodes, &reference, &tree, draft, &log);
        for r in results {
            match r {
                Ok((sub, warnings)) => {
                    partial.warnings.extend(warnings);
                    partial.subsections.push(sub);
                }
                Err(e) => return Err(fail(e.into(), partial, &log)),
            }
        }

        partial.stage = Stage::Assembly;
        let mut texts = partial.components.to_sections();
        texts.description = join_description(&partial.subsections);
        let meta = self.record(log.snapshot());
        match PatentDoc::from_sections(texts, self.cfg.section_order.clone(), meta) {
            Ok(patent) => Ok(RunOutcome {
                patent,
                components: partial.components,
                tree,
                subsections: partial.subsections,
                warnings: partial.warnings,
            }),
            Err(e) => Err(fail(e.into(), partial, &log)),
        }
    }

    pub fn partial_patent(&self, partial: &PartialRun) -> PatentDoc {
        partial.patent(self.cfg.section_order.clone(), self.record(partial.calls.clone()))
    }

    /// Step I. Concurrent writers use private logs that are merged in role
    /// order, so the call log does not depend on thread timing.
    fn write_components(&self, draft: &Draft, log: &CallLog) -> Result<Components, Box<(Components, AgentError)>> {
        let roles = AgentRole::COMPONENTS;
        let results: Vec<(AgentRole, Result<String, AgentError>, Vec<CallLogEntry>)> = if self.cfg.parallel_components {
            thread::scope(|s| {
                let handles: Vec<_> = roles
                    .iter()
                    .map(|&role| {
                        s.spawn(move || {
                            let own = CallLog::new();
                            let r = self.agents.write_component(role, draft, &own);
                            (role, r, own.drain())
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("component writer panicked")).collect()
            })
        } else {
            roles
                .iter()
                .map(|&role| {
                    let own = CallLog::new();
                    let r = self.agents.write_component(role, draft, &own);
                    (role, r, own.drain())
                })
                .collect()
        };
        let mut out = Components::default();
        let mut first_err = None;
        for (role, r, calls) in results {
            log.extend(calls);
            match r {
                Ok(text) => out.set(role, text),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        match first_err {
            None => Ok(out),
            Some(e) => Err(Box::new((out, e))),
        }
    }

    /// Step III over all nodes. Sequential by default; with
    /// `parallel_subsections > 1` nodes run on a bounded pool and their
    /// logs are merged in traversal order.
    #[allow(clippy::type_complexity)]
    fn describe_nodes(
        &self,
        nodes: &[&GuidelineNode],
        reference: &Reference,
        tree: &PgTree,
        draft: &Draft,
        log: &CallLog,
    ) -> Vec<Result<(SubsectionDraft, Vec<String>), AgentError>> {
        if self.cfg.parallel_subsections <= 1 {
            let mut out = Vec::with_capacity(nodes.len());
            for n in nodes {
                let r = self.rrag(n, reference, tree, draft, log);
                let stop = r.is_err();
                out.push(r);
                if stop {
                    break;
                }
            }
            return out;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.parallel_subsections)
            .build()
            .expect("thread pool");
        let results: Vec<_> = pool.install(|| {
            nodes
                .par_iter()
                .map(|n| {
                    let own = CallLog::new();
                    let r = self.rrag(n, reference, tree, draft, &own);
                    (r, own.drain())
                })
                .collect()
        });
        let mut out = Vec::with_capacity(nodes.len());
        for (r, calls) in results {
            log.extend(calls);
            let stop = r.is_err();
            out.push(r);
            if stop {
                break;
            }
        }
        out
    }

    /// Retrieve, write, then review and refine until Pass or until
    /// `max_refine_rounds` refinements have been spent.
    pub fn rrag(
        &self,
        node: &GuidelineNode,
        reference: &Reference,
        tree: &PgTree,
        draft: &Draft,
        log: &CallLog,
    ) -> Result<(SubsectionDraft, Vec<String>), AgentError> {
        let mut warnings = Vec::new();
        let id = node.id();
        let ctx = self.agents.retrieve(node, reference, log)?;
        if ctx.empty_retrieval {
            warnings.push(format!("subsection {id}: retrieval returned nothing"));
        }
        let mut text = self.agents.write_subsection(node, &ctx, tree, draft, log)?;
        let mut history = Vec::new();
        let mut no_change = false;
        let mut rounds = 0u32;
        loop {
            let verdict = match self.agents.review(node, &text, draft, log) {
                Ok(v) => v,
                Err(AgentError::MalformedVerdict { detail, .. }) => {
                    let reason = format!("{UNPARSEABLE_VERDICT}: {detail}");
                    warnings.push(format!("subsection {id}: {reason}"));
                    let verdict = ReviewVerdict::new(Verdict::Fail, UNPARSEABLE_VERDICT).expect("non-empty advice");
                    history.push(RoundRecord {
                        text: text.clone(),
                        verdict: verdict.clone(),
                        no_change,
                    });
                    return Ok((
                        SubsectionDraft {
                            node: id,
                            text,
                            rounds_used: rounds,
                            final_verdict: verdict,
                            history,
                            status: SubsectionStatus::AcceptedWithWarning { reason },
                        },
                        warnings,
                    ));
                }
                Err(e) => return Err(e),
            };
            history.push(RoundRecord {
                text: text.clone(),
                verdict: verdict.clone(),
                no_change,
            });
            if verdict.passed() {
                return Ok((
                    SubsectionDraft {
                        node: id,
                        text,
                        rounds_used: rounds,
                        final_verdict: verdict,
                        history,
                        status: SubsectionStatus::Accepted,
                    },
                    warnings,
                ));
            }
            if rounds >= self.cfg.max_refine_rounds {
                let reason = format!("examiner still failing after {rounds} refinements");
                warn!("subsection {id}: {reason}");
                warnings.push(format!("subsection {id}: {reason}"));
                return Ok((
                    SubsectionDraft {
                        node: id,
                        text,
                        rounds_used: rounds,
                        final_verdict: verdict,
                        history,
                        status: SubsectionStatus::AcceptedWithWarning { reason },
                    },
                    warnings,
                ));
            }
            let revised = self.agents.refine(node, &text, &verdict.advice, tree, log)?;
            no_change = revised == text;
            text = revised;
            rounds += 1;
        }
    }
}
