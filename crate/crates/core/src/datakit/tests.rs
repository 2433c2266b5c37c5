use std::collections::BTreeSet;

use super::*;
use crate::gateway::{Gateway, MockPlaybook};
use crate::mockkit::{synthetic_record, DatasetScript, COLLECT, DRAFT_QUALITY};

fn agents(pb: MockPlaybook) -> Agents {
    let (gw, _) = Gateway::mock(pb).unwrap();
    Agents::new(gw, "mock-model")
}

fn write_corpus(dir: &Path, n: usize) {
    let lines: Vec<String> = (0..n)
        .map(|i| serde_json::to_string(&synthetic_record(i)).unwrap())
        .collect();
    fs::write(dir.join("corpus.jsonl"), lines.join("\n")).unwrap();
}

#[test]
fn five_answers_make_a_draft() {
    let a = agents(DatasetScript::new([3]).playbook());
    let log = CallLog::new();
    let d = synthesize_draft(&a, &synthetic_record(3), &log).unwrap();
    assert_eq!(d.source_id(), Some("rec-0003"));
    for q in 1..=5 {
        assert_eq!(d.answer(q), Some(DatasetScript::answer(3, q).as_str()));
    }
    assert_eq!(log.len(), 5);
    assert!(log.snapshot().iter().all(|c| c.agent_role == "inventor"));
}

#[test]
fn empty_answer_skips_record() {
    let a = agents(DatasetScript::new([1]).empty_answer(1, 2).playbook());
    let out = process_record(&a, &synthetic_record(1), ReviewerMapping::Literal);
    assert!(out.draft.is_none());
    assert!(!out.accepted());
    assert_eq!(out.log.len(), 1);
    assert_eq!(out.log[0].stage, "synthesize");
}

#[test]
fn synthesis_is_deterministic() {
    let pb = DatasetScript::new([5]).playbook();
    let a = synthesize_draft(&agents(pb.clone()), &synthetic_record(5), &CallLog::new()).unwrap();
    let b = synthesize_draft(&agents(pb), &synthetic_record(5), &CallLog::new()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gate_pass_and_fail() {
    let draft = synthesize_draft(&agents(DatasetScript::new([0]).playbook()), &synthetic_record(0), &CallLog::new())
        .unwrap();
    let a = agents(DatasetScript::new([0]).playbook());
    let q = review_draft_quality(&a, &draft, ReviewerMapping::Literal, &CallLog::new()).unwrap();
    assert_eq!(q.overall(), Verdict::Pass);
    assert_eq!(q.entries.len(), 5);

    let a = agents(DatasetScript::new([0]).fail(0, 3, "no solution details").playbook());
    let q = review_draft_quality(&a, &draft, ReviewerMapping::Literal, &CallLog::new()).unwrap();
    assert_eq!(q.overall(), Verdict::Fail);
    let f: Vec<_> = q.failures().collect();
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].question_id, 3);
    assert_eq!(f[0].reason, "no solution details");
}

#[test]
fn unparseable_gate_verdict_is_fail() {
    let draft = synthesize_draft(&agents(DatasetScript::new([0]).playbook()), &synthetic_record(0), &CallLog::new())
        .unwrap();
    let a = agents(MockPlaybook::new().on(DRAFT_QUALITY, ["looks fine"]));
    let q = review_draft_quality(&a, &draft, ReviewerMapping::Literal, &CallLog::new()).unwrap();
    assert_eq!(q.overall(), Verdict::Fail);
    assert!(q.entries.iter().all(|e| e.reason == UNPARSEABLE_REASON));
}

#[test]
fn corrected_mapping_swaps_last_two() {
    let draft = synthesize_draft(&agents(DatasetScript::new([0]).playbook()), &synthetic_record(0), &CallLog::new())
        .unwrap();
    let a = agents(MockPlaybook::new().on(DRAFT_QUALITY, ["<Result> Pass </Result>"]));
    let log = CallLog::new();
    review_draft_quality(&a, &draft, ReviewerMapping::Corrected, &log).unwrap();
    let prompts: Vec<String> = log.snapshot().into_iter().map(|c| c.prompt_hash).collect();
    let log2 = CallLog::new();
    review_draft_quality(&a, &draft, ReviewerMapping::Literal, &log2).unwrap();
    let literal: Vec<String> = log2.snapshot().into_iter().map(|c| c.prompt_hash).collect();
    assert_eq!(prompts[..3], literal[..3]);
    assert_ne!(prompts[3], literal[3]);
    assert_ne!(prompts[4], literal[4]);
}

#[test]
fn gate_accepts_1933_of_2000() {
    let failing: BTreeSet<usize> = (0..2000).filter(|i| i % 30 == 7).take(67).collect();
    assert_eq!(failing.len(), 67);
    let mut pb = MockPlaybook::new();
    for &i in &failing {
        pb = pb.on(
            &format!("# Draft: {}", DatasetScript::answer(i, 2)),
            ["<Result> Fail </Result><Reason> prior art missing </Reason>"],
        );
    }
    let a = agents(pb.on(DRAFT_QUALITY, ["<Result> Pass </Result>"]));
    let accepted = (0..2000)
        .filter(|&i| {
            let d = Draft::from_answers([1u8, 2, 3, 4, 5].map(|q| DatasetScript::answer(i, q)), None).unwrap();
            let q = review_draft_quality(&a, &d, ReviewerMapping::Literal, &CallLog::new()).unwrap();
            q.overall() == Verdict::Pass
        })
        .count();
    assert_eq!(accepted, 1933);
}

#[test]
fn collect_sections_from_description() {
    let a = agents(MockPlaybook::new().on(
        COLLECT,
        ["<Section-1> a </Section-1><Section-2> b </Section-2><Section-3> c </Section-3><Section-4> d </Section-4>"],
    ));
    let p = collect_pgtree(&a, "some description", &CallLog::new()).unwrap();
    assert_eq!(p.len(), 4);
    assert_eq!(p[3], (4, "d".to_string()));

    let a = agents(MockPlaybook::new().on(COLLECT, ["<Section-1> a </Section-1><Section-3> c </Section-3>"]));
    assert!(collect_pgtree(&a, "some description", &CallLog::new()).is_err());

    let a = agents(MockPlaybook::new());
    assert!(matches!(
        collect_pgtree(&a, "  ", &CallLog::new()),
        Err(DatakitError::Agent(AgentError::Precondition(_)))
    ));
}

fn entry(i: usize, with_tree: bool) -> DatasetEntry {
    let draft = Draft::from_answers([1u8, 2, 3, 4, 5].map(|q| DatasetScript::answer(i, q)), Some(format!("rec-{i:04}"))).unwrap();
    DatasetEntry {
        record: synthetic_record(i),
        draft: Some(draft),
        pgtree: with_tree.then(|| vec![(1, "body".into()), (2, "hinge".into())]),
    }
}

fn all_train(entries: &BTreeMap<String, DatasetEntry>) -> SplitManifest {
    SplitManifest {
        schema_version: 1,
        seed: 0,
        train: entries.keys().cloned().collect(),
        valid: vec![],
        test: vec![],
        unassigned: vec![],
    }
}

#[test]
fn export_title_pairs() {
    let entries: BTreeMap<_, _> = (0..10).map(|i| (format!("rec-{i:04}"), entry(i, true))).collect();
    let dir = tempfile::tempdir().unwrap();
    let mut report = ExportReport::default();
    export_sft(SftKind::D2T, &all_train(&entries), &entries, dir.path(), &mut report).unwrap();
    let text = fs::read_to_string(dir.path().join("train/D2T.jsonl")).unwrap();
    let lines: Vec<SftRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(report.count("train", SftKind::D2T), 10);
    assert_eq!(lines[0].output, synthetic_record(0).title);
    assert!(lines[0].input.contains(&DatasetScript::answer(0, 1)));
}

#[test]
fn export_guidelines_missing_target() {
    let mut entries: BTreeMap<_, _> = (0..3).map(|i| (format!("rec-{i:04}"), entry(i, true))).collect();
    entries.insert("rec-0001".into(), entry(1, false));
    let dir = tempfile::tempdir().unwrap();
    let mut report = ExportReport::default();
    export_sft(SftKind::D2W, &all_train(&entries), &entries, dir.path(), &mut report).unwrap();
    assert_eq!(report.count("train", SftKind::D2W), 2);
    assert_eq!(report.missing, vec![("rec-0001".to_string(), SftKind::D2W)]);
    let r = sft_record(&entries["rec-0000"], SftKind::D2W).unwrap();
    assert_eq!(r.output, "<Section-1> body </Section-1>\n<Section-2> hinge </Section-2>");
}

#[test]
fn full_patent_order() {
    let r = sft_record(&entry(2, true), SftKind::D2PFull).unwrap();
    let rec = synthetic_record(2);
    let pos = |s: &str| r.output.find(s).unwrap();
    assert!(pos(&rec.title) < pos(&rec.abstract_text));
    assert!(pos(&rec.abstract_text) < pos(&rec.background));
    assert!(pos(&rec.summary) < pos(&rec.description));
    assert!(pos(&rec.description) < pos(&rec.claims));
}

#[test]
fn sft_kind_names_round_trip() {
    for k in SftKind::ALL {
        assert_eq!(k.as_str().parse::<SftKind>().unwrap(), k);
        assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
    }
}

fn build(seed: u64, jobs: usize) -> (BuildReport, tempfile::TempDir) {
    let input = tempfile::tempdir().unwrap();
    write_corpus(input.path(), 10);
    let script = DatasetScript::new(0..10)
        .fail(2, 3, "solution too vague")
        .fail(5, 3, "solution too vague")
        .fail(8, 3, "solution too vague");
    let a = agents(script.playbook());
    let out = tempfile::tempdir().unwrap();
    let cfg = BuildConfig {
        seed,
        jobs,
        ..BuildConfig::default()
    };
    (build_dataset(&a, &cfg, input.path(), out.path()).unwrap(), out)
}

#[test]
fn build_ten_records() {
    let (r, out) = build(11, 1);
    assert_eq!(r.ingested, 10);
    assert_eq!(r.accepted, 7);
    assert_eq!(r.rejected, 3);
    let m = &r.manifest;
    assert_eq!((m.train.len(), m.valid.len(), m.test.len()), (5, 1, 1));
    let union: BTreeSet<_> = m.train.iter().chain(&m.valid).chain(&m.test).collect();
    assert_eq!(union.len(), 7);
    assert!(!union.contains(&"rec-0002".to_string()));
    let borderline = fs::read_to_string(out.path().join("borderline.jsonl")).unwrap();
    assert_eq!(borderline.lines().count(), 3);
    for kind in SftKind::ALL {
        assert_eq!(r.export.count("train", kind), 5, "{kind}");
    }
    assert!(out.path().join("sft/test/D2P_full.jsonl").exists());
    // 10 × 5 inventor + 10 × 5 gate + 7 collector calls.
    assert_eq!(r.calls, 107);
}

#[test]
fn build_is_seed_deterministic() {
    let (a, _d1) = build(11, 1);
    let (b, _d2) = build(11, 4);
    assert_eq!(a.manifest, b.manifest);
    let (c, _d3) = build(12, 1);
    assert_ne!(a.manifest, c.manifest);
}
