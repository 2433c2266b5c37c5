//! Draft/patent dataset construction: inventor simulation, per-question
//! quality gate, guideline collection from descriptions, splits, and SFT
//! pair export.

mod export;
mod records;
mod splits;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_sft, render_sections, sft_record, DatasetEntry, ExportReport, SftKind, SftRecord, SFT_SCHEMA_VERSION};
pub use records::{ingest_dir, FieldMapping, IngestReport, IngestSkip, PatentRecord};
pub use splits::{make_splits, SplitManifest, SplitSizes};

use crate::agents::{AgentError, Agents};
use crate::domain::{CallLog, CallLogEntry, Draft, DraftError, Verdict, QUESTIONS};

pub const UNPARSEABLE_REASON: &str = "unparseable verdict";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatakitError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Draft(#[from] DraftError),
    #[error("{0}")]
    Io(String),
    #[error("split sizes need {requested} records but only {available} are accepted")]
    InsufficientRecords { requested: usize, available: usize },
    #[error("record {record_id} has no target for {kind}")]
    MissingTarget { record_id: String, kind: SftKind },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Which reviewer template checks each question's answer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewerMapping {
    /// Template k reviews answer k.
    #[default]
    Literal,
    /// Templates 4 and 5 swapped, so the drawings check reviews the
    /// figures answer.
    Corrected,
}

impl ReviewerMapping {
    pub fn template_for(self, question_id: u8) -> u8 {
        match (self, question_id) {
            (ReviewerMapping::Corrected, 4) => 5,
            (ReviewerMapping::Corrected, 5) => 4,
            (_, q) => q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityEntry {
    pub question_id: u8,
    pub result: Verdict,
    /// Non-empty for Fail.
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub entries: Vec<QualityEntry>,
}

impl QualityReport {
    pub fn overall(&self) -> Verdict {
        if self.entries.len() == QUESTIONS.len() && self.entries.iter().all(|e| e.result == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &QualityEntry> {
        self.entries.iter().filter(|e| e.result == Verdict::Fail)
    }
}

/// Five inventor-simulation calls, one per canonical question, each given
/// the full record text.
pub fn synthesize_draft(agents: &Agents, rec: &PatentRecord, log: &CallLog) -> Result<Draft, DatakitError> {
    if let Some(name) = rec.first_empty() {
        return Err(DatakitError::Precondition(format!("record {} has empty {}", rec.record_id, name.key())));
    }
    let text = rec.render();
    let mut answers: Vec<String> = Vec::with_capacity(5);
    for q in 1..=5u8 {
        answers.push(agents.inventor_answer(&text, q, log)?);
    }
    let answers: [String; 5] = answers.try_into().expect("five answers");
    Ok(Draft::from_answers(answers, Some(rec.record_id.clone()))?)
}

/// Per-question examiner gate. An unparseable verdict counts as Fail;
/// transport errors propagate.
pub fn review_draft_quality(
    agents: &Agents,
    draft: &Draft,
    mapping: ReviewerMapping,
    log: &CallLog,
) -> Result<QualityReport, DatakitError> {
    let mut entries = Vec::with_capacity(5);
    for qa in draft.qa() {
        let template = mapping.template_for(qa.question_id);
        let entry = match agents.review_answer(template, &qa.answer_text, log) {
            Ok(v) => QualityEntry {
                question_id: qa.question_id,
                result: v.result,
                reason: v.reason.unwrap_or_default(),
            },
            Err(AgentError::MalformedVerdict { .. }) => QualityEntry {
                question_id: qa.question_id,
                result: Verdict::Fail,
                reason: UNPARSEABLE_REASON.into(),
            },
            Err(e) => return Err(e.into()),
        };
        entries.push(entry);
    }
    Ok(QualityReport { entries })
}

/// First-level guideline list summarized from a description.
pub fn collect_pgtree(agents: &Agents, description: &str, log: &CallLog) -> Result<Vec<(usize, String)>, DatakitError> {
    Ok(agents.collect_sections(description, log)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    #[serde(default)]
    pub mapping: FieldMapping,
    #[serde(default = "accepted")]
    pub accept_value: String,
    /// Explicit split sizes; by default 1500/133/300 scaled to the corpus.
    #[serde(default)]
    pub sizes: Option<SplitSizes>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reviewer_mapping: ReviewerMapping,
    #[serde(default = "one")]
    pub jobs: usize,
}

fn accepted() -> String {
    "ACCEPTED".into()
}
fn one() -> usize {
    1
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            mapping: FieldMapping::default(),
            accept_value: accepted(),
            sizes: None,
            seed: 0,
            reviewer_mapping: ReviewerMapping::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildLogEntry {
    pub record_id: String,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub record_id: String,
    pub draft: Option<Draft>,
    pub quality: Option<QualityReport>,
    pub pgtree: Option<Vec<(usize, String)>>,
    pub log: Vec<BuildLogEntry>,
    #[serde(skip)]
    pub calls: Vec<CallLogEntry>,
}

impl RecordOutcome {
    pub fn accepted(&self) -> bool {
        self.quality.as_ref().is_some_and(|q| q.overall() == Verdict::Pass)
    }
}

/// Draft synthesis, quality gate, and guideline collection for one record.
pub fn process_record(agents: &Agents, rec: &PatentRecord, mapping: ReviewerMapping) -> RecordOutcome {
    let log = CallLog::new();
    let mut out = RecordOutcome {
        record_id: rec.record_id.clone(),
        draft: None,
        quality: None,
        pgtree: None,
        log: Vec::new(),
        calls: Vec::new(),
    };
    let note = |stage: &str, reason: String| BuildLogEntry {
        record_id: rec.record_id.clone(),
        stage: stage.into(),
        reason,
    };
    match synthesize_draft(agents, rec, &log) {
        Ok(d) => out.draft = Some(d),
        Err(e) => {
            out.log.push(note("synthesize", e.to_string()));
            out.calls = log.drain();
            return out;
        }
    }
    match review_draft_quality(agents, out.draft.as_ref().expect("draft set"), mapping, &log) {
        Ok(q) => {
            for f in q.failures() {
                out.log.push(note("quality", format!("question {}: {}", f.question_id, f.reason)));
            }
            out.quality = Some(q);
        }
        Err(e) => {
            out.log.push(note("quality", e.to_string()));
            out.calls = log.drain();
            return out;
        }
    }
    if out.accepted() {
        match collect_pgtree(agents, &rec.description, &log) {
            Ok(p) => out.pgtree = Some(p),
            Err(e) => out.log.push(note("pgtree", e.to_string())),
        }
    }
    out.calls = log.drain();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub ingested: usize,
    pub ingest_skipped: usize,
    pub synthesized: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub manifest: SplitManifest,
    pub export: ExportReport,
    pub calls: usize,
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), DatakitError> {
    let io = |e: std::io::Error| DatakitError::Io(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(path).map_err(io)?;
    for item in items {
        writeln!(f, "{}", serde_json::to_string(&item).expect("serializes")).map_err(io)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DatakitError> {
    fs::write(path, serde_json::to_string_pretty(value).expect("serializes") + "\n")
        .map_err(|e| DatakitError::Io(format!("{}: {e}", path.display())))
}

/// Ingest, process every record, split the accepted set, and export all
/// SFT kinds under `out_dir`. Quality rejections go to `borderline.jsonl`
/// for manual review.
pub fn build_dataset(
    agents: &Agents,
    cfg: &BuildConfig,
    input_dir: &Path,
    out_dir: &Path,
) -> Result<BuildReport, DatakitError> {
    let ingest = ingest_dir(input_dir, &cfg.mapping, &cfg.accept_value)?;
    let records: Vec<&PatentRecord> = ingest.records.values().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| DatakitError::Io(e.to_string()))?;
    let outcomes: Vec<RecordOutcome> = pool.install(|| {
        records
            .par_iter()
            .map(|r| process_record(agents, r, cfg.reviewer_mapping))
            .collect()
    });

    fs::create_dir_all(out_dir).map_err(|e| DatakitError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut entries = BTreeMap::new();
    let mut accepted_ids = Vec::new();
    for o in &outcomes {
        if o.accepted() {
            accepted_ids.push(o.record_id.clone());
            entries.insert(
                o.record_id.clone(),
                DatasetEntry {
                    record: ingest.records[&o.record_id].clone(),
                    draft: o.draft.clone(),
                    pgtree: o.pgtree.clone(),
                },
            );
        }
    }
    let sizes = cfg
        .sizes
        .unwrap_or_else(|| SplitSizes::default().proportional(accepted_ids.len()));
    let manifest = make_splits(&accepted_ids, sizes, cfg.seed)?;

    let mut export = ExportReport::default();
    let sft_dir = out_dir.join("sft");
    for kind in SftKind::ALL {
        export_sft(kind, &manifest, &entries, &sft_dir, &mut export)?;
    }

    let mut build_log: Vec<BuildLogEntry> = ingest
        .skipped
        .iter()
        .map(|s| BuildLogEntry {
            record_id: s.source.clone(),
            stage: "ingest".into(),
            reason: s.reason.clone(),
        })
        .collect();
    build_log.extend(outcomes.iter().flat_map(|o| o.log.iter().cloned()));
    build_log.extend(export.missing.iter().map(|(id, kind)| BuildLogEntry {
        record_id: id.clone(),
        stage: "export".into(),
        reason: format!("no target for {kind}"),
    }));
    write_jsonl(&out_dir.join("build_log.jsonl"), &build_log)?;
    write_jsonl(
        &out_dir.join("borderline.jsonl"),
        outcomes.iter().filter(|o| o.quality.is_some() && !o.accepted()),
    )?;
    write_jsonl(&out_dir.join("records.jsonl"), entries.values())?;
    let calls: Vec<&CallLogEntry> = outcomes.iter().flat_map(|o| o.calls.iter()).collect();
    write_jsonl(&out_dir.join("calls.jsonl"), &calls)?;
    write_json(&out_dir.join("manifest.json"), &manifest)?;

    let report = BuildReport {
        ingested: ingest.records.len(),
        ingest_skipped: ingest.skipped.len(),
        synthesized: outcomes.iter().filter(|o| o.draft.is_some()).count(),
        accepted: accepted_ids.len(),
        rejected: outcomes.iter().filter(|o| o.quality.is_some() && !o.accepted()).count(),
        manifest,
        export,
        calls: calls.len(),
    };
    write_json(&out_dir.join("report.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests;
