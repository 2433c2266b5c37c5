//! Prompt markers and a playbook generator for scripted offline runs.
//!
//! Each marker is a substring that occurs in exactly one template, so a
//! mock rule keyed on it answers exactly one kind of call.

use std::collections::BTreeMap;

use crate::datakit::PatentRecord;
use crate::domain::Draft;
use crate::gateway::{Matcher, MockPlaybook, MockReply};

pub const TITLE: &str = "generate a patent title";
pub const ABSTRACT: &str = "generate a patent abstract";
pub const BACKGROUND: &str = "generate the detailed background";
pub const SUMMARY: &str = "generate the summary for the patent";
pub const CLAIMS: &str = "generate patent claims";
pub const PLANNER: &str = "writing guide for the patent description";
pub const EXPAND: &str = "into subsections";
pub const RETRIEVAL: &str = "Reference Conetent:";
pub const WRITE: &str = "please draft this subsection";
pub const REFINE: &str = "Only output the revised subsection.";
pub const REVIEW: &str = "Refer to draft and evaluate";
pub const INVENTOR: &str = "You are the inventor of the invention";
pub const DRAFT_QUALITY: &str = "meets the quality standards";
pub const COLLECT: &str = "summarize the key parts";
pub const ZERO_SHOT: &str = "Please write a complete patent document";

/// Marker of the expansion call for section `k`.
pub fn expand_marker(k: usize) -> String {
    format!("split the writing guideline of section {k} into subsections")
}

fn esc(s: &str) -> String {
    regex::escape(s)
}

/// A sample draft about a peristaltic pump, used by examples and tests.
pub fn sample_draft() -> Draft {
    Draft::from_answers(
        [
            "Existing peristaltic pumps wear their tubing quickly and deliver an uneven flow at low speeds.",
            "Conventional pumps use three fixed rollers pressing on the tube. Rotary vane pumps avoid tube wear but \
             contaminate the fluid. The invention keeps the fluid isolated while reducing wear.",
            "A rotor carries spring-loaded rollers whose pressure is adjusted by a cam ring. A controller reads a \
             flow sensor and turns the cam ring to keep the occlusion constant.",
            "The adjustable cam ring and the closed-loop occlusion control are the points to be protected.",
            "Figure 1 shows the pump in section. Figure 2 shows the cam ring. Figure 3 is a control flow chart.",
        ],
        Some("sample-pump".into()),
    )
    .expect("sample draft is valid")
}

/// Scripted responses for a complete pipeline run with a given tree shape.
///
/// Guideline texts are `Guideline i.j: ...` so every per-node prompt can be
/// matched by its guideline line. Reviews pass unless a script is set for
/// a node with [`ScriptedRun::review`].
#[derive(Debug, Clone)]
pub struct ScriptedRun {
    shape: Vec<usize>,
    expansion: bool,
    reviews: BTreeMap<(usize, usize), Vec<MockReply>>,
    default_review: Vec<MockReply>,
    extra: Vec<(Matcher, Vec<MockReply>)>,
    words_per_subsection: usize,
}

pub fn pass(advice: &str) -> MockReply {
    MockReply::Text(format!("<Result>Pass</Result>\n<Advice>{advice}</Advice>"))
}

pub fn fail(advice: &str) -> MockReply {
    MockReply::Text(format!("<Result>Fail</Result>\n<Advice>{advice}</Advice>"))
}

impl ScriptedRun {
    /// `shape[i]` subsections in section `i + 1`. With `expansion` off every
    /// entry must be 1.
    pub fn new(shape: &[usize], expansion: bool) -> Self {
        assert!(!shape.is_empty() && shape.iter().all(|&t| t >= 1));
        assert!(expansion || shape.iter().all(|&t| t == 1));
        Self {
            shape: shape.to_vec(),
            expansion,
            reviews: BTreeMap::new(),
            default_review: vec![pass("terminology is consistent with the draft")],
            extra: Vec::new(),
            words_per_subsection: 0,
        }
    }

    pub fn review(mut self, section: usize, subsection: usize, replies: Vec<MockReply>) -> Self {
        self.reviews.insert((section, subsection), replies);
        self
    }

    pub fn default_review(mut self, replies: Vec<MockReply>) -> Self {
        self.default_review = replies;
        self
    }

    /// Rules placed before the generated ones, so they take precedence.
    pub fn rule(mut self, matcher: Matcher, replies: Vec<MockReply>) -> Self {
        self.extra.push((matcher, replies));
        self
    }

    /// Pads each subsection body with distinct filler sentences.
    pub fn words_per_subsection(mut self, n: usize) -> Self {
        self.words_per_subsection = n;
        self
    }

    pub fn guideline(i: usize, j: usize) -> String {
        format!("Guideline {i}.{j}: describe part {j} of section {i} of the pump.")
    }

    pub fn overview(i: usize) -> String {
        format!("Overview {i}: section {i} of the pump description.")
    }

    fn guideline_for(&self, i: usize, j: usize) -> String {
        if self.expansion {
            Self::guideline(i, j)
        } else {
            Self::overview(i)
        }
    }

    pub fn body(&self, i: usize, j: usize) -> String {
        let mut s = format!(
            "Subsection {i}.{j} describes how the rotor assembly in part {i}.{j} cooperates with the cam ring."
        );
        let mut k = 0;
        while s.split_whitespace().count() < self.words_per_subsection {
            k += 1;
            s.push_str(&format!(
                " In variant {i}-{j}-{k} the roller spring number {k} is tuned to stiffness grade {}.",
                i * 1000 + j * 100 + k
            ));
        }
        s
    }

    pub fn refined(i: usize, j: usize, round: usize) -> String {
        format!("Subsection {i}.{j} revised in round {round} clarifies how the cam ring sets the occlusion.")
    }

    pub fn playbook(&self) -> MockPlaybook {
        let mut pb = MockPlaybook::new();
        for (m, replies) in &self.extra {
            pb = pb.rule(m.clone(), replies.clone());
        }
        pb = pb
            .on(TITLE, ["<Title>Peristaltic pump with adjustable cam ring</Title>"])
            .on(
                ABSTRACT,
                ["<Abstract>A peristaltic pump whose roller pressure is set by a rotatable cam ring under closed-loop control.</Abstract>"],
            )
            .on(
                BACKGROUND,
                ["<Background>Peristaltic pumps move fluid by compressing a flexible tube. Fixed rollers wear the tube.</Background>"],
            )
            .on(
                SUMMARY,
                ["<Summary>The invention adjusts roller occlusion with a cam ring driven by a flow controller.</Summary>"],
            )
            .on(
                CLAIMS,
                ["<Claims>1. A pump comprising a rotor, rollers, and a cam ring.\n2. The pump of claim 1, wherein a controller turns the cam ring.</Claims>"],
            );
        let planner: String = (1..=self.shape.len())
            .map(|i| format!("<Section-{i}> {} </Section-{i}>\n", Self::overview(i)))
            .collect();
        pb = pb.on(PLANNER, [planner]);
        if self.expansion {
            for (idx, &t) in self.shape.iter().enumerate() {
                let i = idx + 1;
                let subs: String = (1..=t)
                    .map(|j| format!("<Subsection-{j}> {} </Subsection-{j}>\n", Self::guideline(i, j)))
                    .collect();
                pb = pb.on(&expand_marker(i), [subs]);
            }
        }
        for (idx, &t) in self.shape.iter().enumerate() {
            let i = idx + 1;
            for j in 1..=t {
                let g = self.guideline_for(i, j);
                pb = pb
                    .on(&format!("Writing Plan: {g}"), [format!("Relevant material for part {i}.{j}.")])
                    .rule(
                        Matcher::Regex(format!("(?s)Subsection Writing Guideline: {}.*{}", esc(&g), esc(REFINE))),
                        (1..=8).map(|r| Self::refined(i, j, r)).collect::<Vec<_>>(),
                    )
                    .on(&format!("Subsection Writing Guideline: {g}"), [self.body(i, j)]);
                let replies = self.reviews.get(&(i, j)).unwrap_or(&self.default_review).clone();
                pb = pb.rule(Matcher::Substring(format!("<WritingGuideline> {g} </WritingGuideline>")), replies);
            }
        }
        pb
    }
}

/// A synthetic accepted record; `i` makes every field unique.
pub fn synthetic_record(i: usize) -> PatentRecord {
    PatentRecord {
        record_id: format!("rec-{i:04}"),
        title: format!("Widget {i:04} with a folding hinge"),
        abstract_text: format!("A widget {i:04} whose hinge folds flat."),
        background: format!("Hinged widgets of family {i:04} tend to loosen over time."),
        summary: format!("Widget {i:04} uses a detent to hold the hinge."),
        claims: format!("1. A widget {i:04} comprising a hinge and a detent."),
        description: format!(
            "The widget {i:04} has a body and a lid. The hinge joins the lid to the body. \
             A detent spring holds the lid open."
        ),
        decision_label: "ACCEPTED".into(),
    }
}

/// Scripted inventor, gate, and collector replies for
/// [`synthetic_record`]s. Every answer passes unless a failure is scripted.
#[derive(Debug, Clone, Default)]
pub struct DatasetScript {
    records: Vec<usize>,
    failures: BTreeMap<(usize, u8), String>,
    empty_answers: Vec<(usize, u8)>,
}

impl DatasetScript {
    pub fn new(records: impl IntoIterator<Item = usize>) -> Self {
        Self {
            records: records.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn fail(mut self, record: usize, question: u8, reason: &str) -> Self {
        self.failures.insert((record, question), reason.into());
        self
    }

    pub fn empty_answer(mut self, record: usize, question: u8) -> Self {
        self.empty_answers.push((record, question));
        self
    }

    pub fn answer(record: usize, question: u8) -> String {
        format!("Answer {question} about widget {record:04}: the hinge and detent cooperate.")
    }

    pub fn playbook(&self) -> MockPlaybook {
        let mut pb = MockPlaybook::new();
        for ((r, q), reason) in &self.failures {
            pb = pb.on(
                &format!("# Draft: {}", Self::answer(*r, *q)),
                [format!("<Result> Fail </Result>\n<Reason> {reason} </Reason>")],
            );
        }
        pb = pb.on(DRAFT_QUALITY, ["<Result> Pass </Result>"]);
        for &r in &self.records {
            for q in 1..=5u8 {
                let question = crate::domain::question_text(q).expect("valid id");
                let reply = if self.empty_answers.contains(&(r, q)) {
                    "<Answer></Answer>".to_string()
                } else {
                    format!("<Answer>{}</Answer>", Self::answer(r, q))
                };
                pb = pb.rule(
                    Matcher::Regex(format!(
                        "(?s)Title: Widget {r:04} .*Question: {}",
                        esc(question)
                    )),
                    [reply],
                );
            }
        }
        pb.on(
            COLLECT,
            ["<Section-1> Describe the body and lid. </Section-1>\n<Section-2> Describe the hinge and detent. </Section-2>"],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::{PromptRegistry, TemplateId};

    #[test]
    fn markers_hit_exactly_one_template() {
        let reg = PromptRegistry::embedded();
        for m in [
            TITLE, ABSTRACT, BACKGROUND, SUMMARY, CLAIMS, PLANNER, EXPAND, RETRIEVAL, WRITE, REFINE, REVIEW,
            COLLECT, ZERO_SHOT,
        ] {
            let hits: Vec<_> = TemplateId::ALL.iter().filter(|id| reg.get(**id).body.contains(m)).collect();
            assert_eq!(hits.len(), 1, "{m} -> {hits:?}");
        }
        let inv = TemplateId::ALL.iter().filter(|id| reg.get(**id).body.contains(INVENTOR)).count();
        assert_eq!(inv, 5);
        let dq = TemplateId::ALL.iter().filter(|id| reg.get(**id).body.contains(DRAFT_QUALITY)).count();
        assert_eq!(dq, 5);
    }

    #[test]
    fn body_padding_reaches_target() {
        let run = ScriptedRun::new(&[1], false).words_per_subsection(300);
        assert!(run.body(1, 1).split_whitespace().count() >= 300);
    }
}
