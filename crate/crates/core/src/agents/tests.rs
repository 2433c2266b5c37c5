use super::*;
use crate::gateway::{Matcher, MockBackend, MockPlaybook, MockReply};
use crate::mockkit::{self, sample_draft, ScriptedRun};

fn agents(pb: MockPlaybook) -> (Agents, Arc<MockBackend>) {
    let (gw, mock) = Gateway::mock(pb).unwrap();
    (Agents::new(gw, "mock-model"), mock)
}

fn reference() -> Reference {
    Reference {
        title: "Pump".into(),
        abstract_text: "A pump.".into(),
        background: "Pumps wear tubes.".into(),
        summary: "A cam ring sets occlusion.".into(),
        claims: "1. A pump comprising a rotor and a cam ring.".into(),
        draft: sample_draft(),
    }
}

fn node(text: &str) -> GuidelineNode {
    GuidelineNode {
        section_index: 1,
        subsection_index: 1,
        guideline_text: text.into(),
    }
}

#[test]
fn component_tag_extracted() {
    let (a, _) = agents(MockPlaybook::new().on(mockkit::ABSTRACT, ["<Abstract>An apparatus…</Abstract>"]));
    let log = CallLog::new();
    assert_eq!(a.write_component(AgentRole::Abstract, &sample_draft(), &log).unwrap(), "An apparatus…");
    assert_eq!(log.snapshot()[0].agent_role, "abstract");
}

#[test]
fn missing_tag_then_retry() {
    let pb = MockPlaybook::new().on(mockkit::TITLE, ["A title without tags", "<Title>Pump</Title>"]);
    let (a, mock) = agents(pb);
    let log = CallLog::new();
    assert_eq!(a.write_component(AgentRole::Title, &sample_draft(), &log).unwrap(), "Pump");
    assert_eq!(mock.call_count(), 2);
    let calls = log.snapshot();
    assert_eq!(calls[0].parse_retry, 0);
    assert_eq!(calls[1].parse_retry, 1);
}

#[test]
fn parse_failure_after_retries() {
    let (a, mock) = agents(MockPlaybook::new().on(mockkit::TITLE, ["no tags"]));
    let err = a.write_component(AgentRole::Title, &sample_draft(), &CallLog::new()).unwrap_err();
    assert!(matches!(err, AgentError::Parse { attempts: 3, .. }), "{err}");
    assert_eq!(mock.call_count(), 1 + DEFAULT_PARSE_RETRY_MAX as usize);
}

#[test]
fn claims_verbatim() {
    let claims = "1. A method…\n2. The method…";
    let (a, _) = agents(MockPlaybook::new().on(mockkit::CLAIMS, [format!("<Claims>{claims}</Claims>")]));
    assert_eq!(a.write_component(AgentRole::Claims, &sample_draft(), &CallLog::new()).unwrap(), claims);
}

#[test]
fn non_component_role_rejected() {
    let (a, _) = agents(MockPlaybook::new());
    assert!(matches!(
        a.write_component(AgentRole::Planner, &sample_draft(), &CallLog::new()),
        Err(AgentError::Precondition(_))
    ));
}

#[test]
fn plan_without_expansion() {
    let (a, _) = agents(ScriptedRun::new(&[1, 1, 1], false).playbook());
    let out = a.plan(&sample_draft(), Expansion::Off, &CallLog::new()).unwrap();
    assert_eq!(out.tree.section_count(), 3);
    assert_eq!(out.tree.shape(), vec![1, 1, 1]);
}

#[test]
fn plan_with_expansion() {
    let (a, _) = agents(ScriptedRun::new(&[2, 3], true).playbook());
    let log = CallLog::new();
    let out = a.plan(&sample_draft(), Expansion::PerSectionCall, &log).unwrap();
    assert_eq!(out.tree.shape(), vec![2, 3]);
    assert_eq!(out.tree.node_count(), 5);
    assert!(out.warnings.is_empty());
    assert_eq!(log.len(), 3);
}

#[test]
fn plan_non_contiguous() {
    let pb = MockPlaybook::new().on(mockkit::PLANNER, ["<Section-1>a</Section-1><Section-3>c</Section-3>"]);
    let (a, _) = agents(pb);
    let err = a.plan(&sample_draft(), Expansion::Off, &CallLog::new()).unwrap_err();
    assert!(
        matches!(
            err,
            AgentError::Parse {
                source: TagError::NonContiguousIndices(_),
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn expansion_fallback_on_malformed_section() {
    let run = ScriptedRun::new(&[2, 1], true).rule(
        Matcher::Substring(mockkit::expand_marker(2)),
        vec![MockReply::Text("no blocks here".into())],
    );
    let (a, _) = agents(run.playbook());
    let out = a.plan(&sample_draft(), Expansion::PerSectionCall, &CallLog::new()).unwrap();
    assert_eq!(out.tree.shape(), vec![2, 1]);
    assert_eq!(out.warnings.len(), 1);
    assert!(out.warnings[0].starts_with("section 2"));
    assert_eq!(out.tree.sections()[1].subsections[0].guideline_text, ScriptedRun::overview(2));
}

#[test]
fn retrieve_verbatim_and_empty() {
    let r = reference();
    let (a, _) = agents(MockPlaybook::new().on("Writing Plan: claims", [r.claims.clone()]).on(mockkit::RETRIEVAL, [""]));
    let ctx = a.retrieve(&node("claims"), &r, &CallLog::new()).unwrap();
    assert_eq!(ctx.content, r.claims);
    assert!(!ctx.empty_retrieval);
    assert!(ctx.source_hint.contains("claims"));
    let ctx = a.retrieve(&node("other"), &r, &CallLog::new()).unwrap();
    assert!(ctx.empty_retrieval);
}

#[test]
fn retrieve_requires_complete_reference() {
    let mut r = reference();
    r.summary.clear();
    let (a, mock) = agents(MockPlaybook::new().default_response("x"));
    assert_eq!(
        a.retrieve(&node("g"), &r, &CallLog::new()).unwrap_err(),
        AgentError::IncompleteReference(SectionName::Summary)
    );
    assert_eq!(mock.call_count(), 0);
}

fn one_node_tree() -> PgTree {
    PgTree::single_layer(&[(1, "g".to_string())]).unwrap()
}

fn ctx() -> RetrievedContext {
    RetrievedContext::new(NodeId::new(1, 1), "material".into(), &reference())
}

#[test]
fn write_subsection_policies() {
    let tree = one_node_tree();
    let n = tree.nodes().next().unwrap().clone();
    for (reply, expected) in [
        ("The rotor turns.", Ok("The rotor turns.")),
        ("Sure, here is the subsection:\nThe rotor turns.", Ok("The rotor turns.")),
        ("", Err(AgentError::EmptyGeneration(AgentRole::Description))),
    ] {
        let (a, _) = agents(MockPlaybook::new().on(mockkit::WRITE, [reply]));
        let got = a.write_subsection(&n, &ctx(), &tree, &sample_draft(), &CallLog::new());
        assert_eq!(got, expected.map(str::to_string));
    }
}

#[test]
fn write_subsection_rejects_foreign_node() {
    let (a, _) = agents(MockPlaybook::new().default_response("x"));
    let foreign = node("not in tree");
    assert_eq!(
        a.write_subsection(&foreign, &ctx(), &one_node_tree(), &sample_draft(), &CallLog::new()),
        Err(AgentError::NodeNotInTree(NodeId::new(1, 1)))
    );
}

#[test]
fn review_parses_and_tolerates_whitespace() {
    let (a, _) = agents(
        MockPlaybook::new().on(mockkit::REVIEW, ["<Result>Pass</Result><Advice>tighten terminology</Advice>"]),
    );
    let v = a.review(&node("g"), "text", &sample_draft(), &CallLog::new()).unwrap();
    assert_eq!(v, ReviewVerdict::new(Verdict::Pass, "tighten terminology").unwrap());

    let (a, _) = agents(MockPlaybook::new().on(mockkit::REVIEW, ["<Result> Pass </Result>\n<Advice> ok </Advice>"]));
    assert!(a.review(&node("g"), "text", &sample_draft(), &CallLog::new()).unwrap().passed());
}

#[test]
fn review_without_advice_is_malformed() {
    let (a, mock) = agents(MockPlaybook::new().on(mockkit::REVIEW, ["<Result>Fail</Result>"]));
    let err = a.review(&node("g"), "text", &sample_draft(), &CallLog::new()).unwrap_err();
    assert!(matches!(err, AgentError::MalformedVerdict { .. }), "{err}");
    assert_eq!(mock.call_count(), 3);

    let (a, _) = agents(MockPlaybook::new().on(mockkit::REVIEW, ["<Result>Maybe</Result><Advice>x</Advice>"]));
    assert!(matches!(
        a.review(&node("g"), "text", &sample_draft(), &CallLog::new()),
        Err(AgentError::MalformedVerdict { .. })
    ));
}

#[test]
fn review_retry_recovers() {
    let (a, _) = agents(
        MockPlaybook::new().on(mockkit::REVIEW, ["<Result>Fail</Result>", "<Result>Fail</Result><Advice>add figures</Advice>"]),
    );
    let v = a.review(&node("g"), "text", &sample_draft(), &CallLog::new()).unwrap();
    assert_eq!(v.result, Verdict::Fail);
    assert_eq!(v.advice, "add figures");
}

#[test]
fn refine_contract() {
    let tree = one_node_tree();
    let n = tree.nodes().next().unwrap().clone();
    let (a, _) = agents(MockPlaybook::new().on(mockkit::REFINE, ["Revised.", ""]));
    let log = CallLog::new();
    assert_eq!(a.refine(&n, "old", "fix it", &tree, &log).unwrap(), "Revised.");
    assert_eq!(
        a.refine(&n, "old", "fix it", &tree, &log),
        Err(AgentError::EmptyGeneration(AgentRole::Description))
    );
    assert!(matches!(a.refine(&n, "old", "  ", &tree, &log), Err(AgentError::Precondition(_))));
}

#[test]
fn dataset_roles() {
    let pb = MockPlaybook::new()
        .on("technical problem that this patent aims to solve", ["<Answer>Tubes wear.</Answer>"])
        .on("# Draft: good", ["<Result> Pass </Result>"])
        .on("# Draft: bad", ["<Result> Fail </Result><Reason> no solution </Reason>"])
        .on("# Draft: unclear", ["<Result> Fail </Result>"])
        .on(mockkit::COLLECT, ["<Section-1> a </Section-1><Section-2> b </Section-2>"]);
    let (a, _) = agents(pb);
    let log = CallLog::new();
    assert_eq!(a.inventor_answer("patent text", 1, &log).unwrap(), "Tubes wear.");
    assert_eq!(a.review_answer(3, "good", &log).unwrap().result, Verdict::Pass);
    let bad = a.review_answer(3, "bad", &log).unwrap();
    assert_eq!(bad.reason.as_deref(), Some("no solution"));
    assert!(matches!(a.review_answer(3, "unclear", &log), Err(AgentError::MalformedVerdict { .. })));
    assert_eq!(a.collect_sections("desc", &log).unwrap().len(), 2);
    assert!(matches!(a.collect_sections(" ", &log), Err(AgentError::Precondition(_))));
}

#[test]
fn per_role_backend_and_model() {
    let (gw_a, mock_a) = Gateway::mock(MockPlaybook::new().default_response("<Title>A</Title>")).unwrap();
    let (gw_b, mock_b) = Gateway::mock(MockPlaybook::new().default_response("<Title>B</Title>")).unwrap();
    let a = Agents::new(gw_a, "base")
        .with_gateway("ft", gw_b)
        .configure(
            AgentRole::Title,
            &AgentConfig {
                backend: Some("ft".into()),
                model_id: Some("ft-7b".into()),
                ..AgentConfig::default()
            },
        )
        .unwrap();
    let log = CallLog::new();
    assert_eq!(a.write_component(AgentRole::Title, &sample_draft(), &log).unwrap(), "B");
    assert_eq!(log.snapshot()[0].model_id, "ft-7b");
    assert_eq!((mock_a.call_count(), mock_b.call_count()), (0, 1));
    assert!(Agents::new(Gateway::mock(MockPlaybook::new()).unwrap().0, "m")
        .configure(
            AgentRole::Title,
            &AgentConfig {
                backend: Some("nope".into()),
                ..AgentConfig::default()
            }
        )
        .is_err());
}
