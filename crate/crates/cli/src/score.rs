//! Scoring generated documents against references.
//!
//! A document directory holds `<doc_id>.txt` files, `<doc_id>.json`
//! patent files, or `<doc_id>/` run directories with a `patent.json`.
//! Structured patents are scored on their section bodies without headers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use patentsmith_core::domain::{parse_patent_text, PatentDoc};
use patentsmith_metrics::{score_documents, DocPair, Exec, MetricSettings};
use thiserror::Error;

use crate::report::{BenchReport, ReportHeader, ReportRow, REPORT_SCHEMA_VERSION};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("documents are not aligned: missing in reference {missing_in_reference:?}, missing in generated {missing_in_generated:?}")]
pub struct AlignmentError {
    pub missing_in_reference: Vec<String>,
    pub missing_in_generated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub model_id: Option<String>,
    pub seed: Option<u64>,
}

fn from_patent(doc_id: String, p: PatentDoc) -> Document {
    let meta = &p.generation_meta;
    let model_id = (!meta.model_id.is_empty()).then(|| meta.model_id.clone());
    let seed = model_id.as_ref().map(|_| meta.seed);
    Document {
        doc_id,
        text: p.body_text(),
        model_id,
        seed,
    }
}

/// Plain text, or the section bodies when the text is a serialized patent.
pub fn document_text(raw: &str) -> String {
    match parse_patent_text(raw) {
        Ok(parsed) => parsed
            .order
            .iter()
            .map(|n| parsed.sections.get(*n))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>()
            .join("\n\n"),
        Err(_) => raw.to_string(),
    }
}

pub fn load_documents(dir: &Path) -> Result<BTreeMap<String, Document>, CliError> {
    let io = |e: std::io::Error| CliError::Invalid(format!("{}: {e}", dir.display()));
    let mut docs = BTreeMap::new();
    let mut paths: Vec<_> = fs::read_dir(dir).map_err(io)?.filter_map(Result::ok).map(|e| e.path()).collect();
    paths.sort();
    for path in paths {
        let Some(stem) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else {
            continue;
        };
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())));
        let doc = if path.is_dir() {
            let pj = path.join("patent.json");
            if !pj.exists() {
                continue;
            }
            let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or(stem);
            let p = PatentDoc::from_json(&read(&pj)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", pj.display())))?;
            from_patent(name, p)
        } else {
            match path.extension().and_then(|e| e.to_str()) {
                Some("txt") => Document {
                    text: document_text(&read(&path)?),
                    doc_id: stem,
                    model_id: None,
                    seed: None,
                },
                Some("json") => match PatentDoc::from_json(&read(&path)?) {
                    Ok(p) => from_patent(stem, p),
                    Err(_) => continue,
                },
                _ => continue,
            }
        };
        if docs.contains_key(&doc.doc_id) {
            return Err(CliError::Invalid(format!(
                "{}: doc id {} appears more than once",
                dir.display(),
                doc.doc_id
            )));
        }
        docs.insert(doc.doc_id.clone(), doc);
    }
    Ok(docs)
}

pub fn check_alignment(
    generated: &BTreeMap<String, Document>,
    reference: &BTreeMap<String, Document>,
) -> Result<(), AlignmentError> {
    let g: BTreeSet<_> = generated.keys().collect();
    let r: BTreeSet<_> = reference.keys().collect();
    let missing_in_reference: Vec<String> = g.difference(&r).map(|s| s.to_string()).collect();
    let missing_in_generated: Vec<String> = r.difference(&g).map(|s| s.to_string()).collect();
    if missing_in_reference.is_empty() && missing_in_generated.is_empty() {
        Ok(())
    } else {
        Err(AlignmentError {
            missing_in_reference,
            missing_in_generated,
        })
    }
}

/// Header built from the documents' own generation metadata.
pub fn header_for<'a>(settings: &MetricSettings, docs: impl IntoIterator<Item = &'a Document>) -> ReportHeader {
    let mut models = BTreeSet::new();
    let mut seeds = BTreeSet::new();
    for d in docs {
        models.extend(d.model_id.clone());
        seeds.extend(d.seed);
    }
    ReportHeader {
        schema_version: REPORT_SCHEMA_VERSION,
        metrics: settings.header(),
        model_ids: models.into_iter().collect(),
        seed: if seeds.len() == 1 { seeds.into_iter().next() } else { None },
    }
}

/// Scores aligned documents. Rows for `failed` ids are added as failures.
pub fn score_aligned(
    pairs: &[(&Document, &Document)],
    settings: &MetricSettings,
    header: ReportHeader,
    failed: &[(String, String)],
) -> Result<BenchReport, CliError> {
    let doc_pairs: Vec<DocPair<'_>> = pairs
        .iter()
        .map(|(g, r)| DocPair {
            doc_id: &g.doc_id,
            candidate: &g.text,
            reference: &r.text,
        })
        .collect();
    let scores = score_documents(&doc_pairs, settings, Exec::default()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut rows: Vec<ReportRow> = scores.iter().map(ReportRow::scored).collect();
    rows.extend(
        failed
            .iter()
            .map(|(id, err)| ReportRow::failed(id, settings.thresholds.len(), err.clone())),
    );
    Ok(BenchReport::new(header, rows))
}

/// Scores every generated document against its reference by doc id.
pub fn score_dirs(generated: &Path, reference: &Path, settings: &MetricSettings) -> Result<BenchReport, CliError> {
    let g = load_documents(generated)?;
    let r = load_documents(reference)?;
    check_alignment(&g, &r)?;
    let pairs: Vec<_> = g.values().map(|d| (d, &r[&d.doc_id])).collect();
    score_aligned(&pairs, settings, header_for(settings, g.values()), &[])
}
