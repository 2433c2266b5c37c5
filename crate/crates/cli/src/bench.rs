//! Resumable benchmark: generate every manifest draft, then score the
//! completed documents against their references.

use std::fs;
use std::path::{Path, PathBuf};

use patentsmith_core::domain::{DocStatus, Draft, PatentDoc};
use patentsmith_core::pipeline::{Pipeline, RunDir};
use patentsmith_metrics::MetricSettings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::report::{BenchReport, ReportHeader, REPORT_SCHEMA_VERSION};
use crate::score::{document_text, score_aligned, Document};
use crate::{read_draft, CliError};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub doc_id: String,
    /// Draft JSON, relative to the manifest.
    pub draft: PathBuf,
    /// Reference patent: plain text or patent JSON.
    pub reference: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestsetManifest {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub docs: Vec<ManifestEntry>,
}

fn schema() -> u32 {
    MANIFEST_SCHEMA_VERSION
}

/// One validated manifest item.
#[derive(Debug, Clone)]
pub struct BenchItem {
    pub doc_id: String,
    pub draft: Draft,
    pub reference: Document,
}

fn reference_document(doc_id: &str, path: &Path) -> Result<Document, CliError> {
    let raw = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let text = if path.extension().is_some_and(|e| e == "json") {
        PatentDoc::from_json(&raw)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
            .body_text()
    } else {
        document_text(&raw)
    };
    Ok(Document {
        doc_id: doc_id.to_string(),
        text,
        model_id: None,
        seed: None,
    })
}

impl TestsetManifest {
    /// Loads the manifest and every draft and reference it names.
    pub fn load(path: &Path) -> Result<Vec<BenchItem>, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let m: TestsetManifest =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        if m.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(CliError::Invalid(format!(
                "manifest schema_version {} unsupported (expected {MANIFEST_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        let base = path.parent().unwrap_or(Path::new(""));
        let mut seen = std::collections::BTreeSet::new();
        m.docs
            .iter()
            .map(|e| {
                if e.doc_id.is_empty() || e.doc_id.contains(['/', '\\']) || !seen.insert(e.doc_id.clone()) {
                    return Err(CliError::Invalid(format!("manifest: bad or repeated doc_id {:?}", e.doc_id)));
                }
                Ok(BenchItem {
                    doc_id: e.doc_id.clone(),
                    draft: read_draft(&base.join(&e.draft))?,
                    reference: reference_document(&e.doc_id, &base.join(&e.reference))?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub report: BenchReport,
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
}

impl BenchOutcome {
    pub fn all_complete(&self) -> bool {
        self.report.aggregate.failed == 0
    }
}

enum DocResult {
    Done { doc: Box<PatentDoc>, skipped: bool },
    Failed(String),
}

fn run_one(pipeline: &Pipeline, item: &BenchItem, dir: &Path, resume: bool) -> Result<DocResult, CliError> {
    let rd = RunDir::open(dir);
    if resume && rd.status().is_some_and(|s| s.status == DocStatus::Complete) {
        if let Ok(doc) = rd.read_patent() {
            info!(doc = %item.doc_id, "already complete, skipping");
            return Ok(DocResult::Done {
                    doc: Box::new(doc),
                    skipped: true,
                });
        }
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    match pipeline.run_in_dir(&item.draft, dir)? {
        Ok(outcome) => Ok(DocResult::Done {
            doc: Box::new(outcome.patent),
            skipped: false,
        }),
        Err(failure) => {
            warn!(doc = %item.doc_id, "run aborted: {}", failure.error);
            Ok(DocResult::Failed(failure.error.to_string()))
        }
    }
}

/// Runs each item into `<out>/runs/<doc_id>` on up to `jobs` threads and
/// writes the report under `out`. With `resume`, documents whose run
/// directory is already complete are not regenerated.
pub fn run_bench(
    pipeline: &Pipeline,
    items: &[BenchItem],
    settings: &MetricSettings,
    model_ids: Vec<String>,
    out: &Path,
    jobs: usize,
    resume: bool,
) -> Result<BenchOutcome, CliError> {
    let runs = out.join("runs");
    fs::create_dir_all(&runs).map_err(|e| CliError::Io(format!("{}: {e}", runs.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<Result<DocResult, CliError>> = pool.install(|| {
        items
            .par_iter()
            .map(|item| run_one(pipeline, item, &runs.join(&item.doc_id), resume))
            .collect()
    });

    let mut generated = Vec::new();
    let mut failed = Vec::new();
    let mut executed = Vec::new();
    let mut skipped = Vec::new();
    for (item, res) in items.iter().zip(results) {
        match res? {
            DocResult::Done { doc, skipped: s } => {
                if s {
                    skipped.push(item.doc_id.clone());
                } else {
                    executed.push(item.doc_id.clone());
                }
                generated.push(Document {
                    doc_id: item.doc_id.clone(),
                    text: doc.body_text(),
                    model_id: Some(doc.generation_meta.model_id.clone()),
                    seed: Some(doc.generation_meta.seed),
                });
            }
            DocResult::Failed(err) => {
                executed.push(item.doc_id.clone());
                failed.push((item.doc_id.clone(), err));
            }
        }
    }
    let pairs: Vec<(&Document, &Document)> = generated
        .iter()
        .map(|g| {
            let r = &items.iter().find(|i| i.doc_id == g.doc_id).expect("item exists").reference;
            (g, r)
        })
        .collect();
    let header = ReportHeader {
        schema_version: REPORT_SCHEMA_VERSION,
        metrics: settings.header(),
        model_ids,
        seed: Some(pipeline.config().seed),
    };
    let report = score_aligned(&pairs, settings, header, &failed)?;
    report.write(out)?;
    Ok(BenchOutcome {
        report,
        executed,
        skipped,
    })
}
