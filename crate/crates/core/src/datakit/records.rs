//! Patent records and ingestion from a directory of JSON / JSONL files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::DatakitError;
use crate::domain::SectionName;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatentRecord {
    pub record_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub background: String,
    pub summary: String,
    pub claims: String,
    pub description: String,
    pub decision_label: String,
}

impl PatentRecord {
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

    pub fn first_empty(&self) -> Option<SectionName> {
        SectionName::ALL.into_iter().find(|n| self.section(*n).trim().is_empty())
    }

    /// Full record text given to the simulated inventor.
    pub fn render(&self) -> String {
        SectionName::ALL
            .iter()
            .map(|n| format!("{}: {}", n.label(), self.section(*n)))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Source key for each record field. Unlisted fields use their own name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMapping {
    #[serde(default = "f_id")]
    pub record_id: String,
    #[serde(default = "f_title")]
    pub title: String,
    #[serde(default = "f_abstract", rename = "abstract")]
    pub abstract_text: String,
    #[serde(default = "f_background")]
    pub background: String,
    #[serde(default = "f_summary")]
    pub summary: String,
    #[serde(default = "f_claims")]
    pub claims: String,
    #[serde(default = "f_description")]
    pub description: String,
    #[serde(default = "f_decision")]
    pub decision_label: String,
}

fn f_id() -> String {
    "record_id".into()
}
fn f_title() -> String {
    "title".into()
}
fn f_abstract() -> String {
    "abstract".into()
}
fn f_background() -> String {
    "background".into()
}
fn f_summary() -> String {
    "summary".into()
}
fn f_claims() -> String {
    "claims".into()
}
fn f_description() -> String {
    "description".into()
}
fn f_decision() -> String {
    "decision_label".into()
}

impl Default for FieldMapping {
    fn default() -> Self {
        Self::identity()
    }
}

impl FieldMapping {
    pub fn identity() -> Self {
        Self {
            record_id: f_id(),
            title: f_title(),
            abstract_text: f_abstract(),
            background: f_background(),
            summary: f_summary(),
            claims: f_claims(),
            description: f_description(),
            decision_label: f_decision(),
        }
    }

    /// Keys used by the Harvard USPTO patent dataset's per-application JSON.
    pub fn hupd() -> Self {
        Self {
            record_id: "application_number".into(),
            description: "full_description".into(),
            decision_label: "decision".into(),
            ..Self::identity()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "hupd" => Some(Self::hupd()),
            _ => None,
        }
    }

    pub fn apply(&self, v: &Value) -> Result<PatentRecord, String> {
        let get = |key: &str| -> Result<String, String> {
            match v.get(key) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                Some(Value::Null) | None => Err(format!("missing field {key:?}")),
                Some(other) => Err(format!("field {key:?} is not text: {other}")),
            }
        };
        Ok(PatentRecord {
            record_id: get(&self.record_id)?,
            title: get(&self.title)?,
            abstract_text: get(&self.abstract_text)?,
            background: get(&self.background)?,
            summary: get(&self.summary)?,
            claims: get(&self.claims)?,
            description: get(&self.description)?,
            decision_label: get(&self.decision_label)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSkip {
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    /// Accepted records keyed by id.
    pub records: BTreeMap<String, PatentRecord>,
    pub skipped: Vec<IngestSkip>,
}

fn record_files(dir: &Path) -> Result<Vec<PathBuf>, DatakitError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| DatakitError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json" || x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every `*.json` (one record) and `*.jsonl` (one per line) file in
/// `dir`, in file-name order. Records with the wrong decision label, an
/// empty field, or a repeated id are skipped with a reason.
pub fn ingest_dir(dir: &Path, mapping: &FieldMapping, accept_value: &str) -> Result<IngestReport, DatakitError> {
    let mut report = IngestReport::default();
    for path in record_files(dir)? {
        let text = fs::read_to_string(&path).map_err(|e| DatakitError::Io(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let items: Vec<(String, &str)> = if path.extension().is_some_and(|x| x == "jsonl") {
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| (format!("{name}:{}", i + 1), l))
                .collect()
        } else {
            vec![(name, text.as_str())]
        };
        for (source, raw) in items {
            let outcome = serde_json::from_str::<Value>(raw)
                .map_err(|e| format!("invalid JSON: {e}"))
                .and_then(|v| mapping.apply(&v));
            let skip = |reason: String| IngestSkip {
                source: source.clone(),
                reason,
            };
            match outcome {
                Err(reason) => report.skipped.push(skip(reason)),
                Ok(rec) if rec.decision_label != accept_value => report.skipped.push(skip(format!(
                    "decision {:?} is not {accept_value:?}",
                    rec.decision_label
                ))),
                Ok(rec) => {
                    if let Some(name) = rec.first_empty() {
                        report.skipped.push(skip(format!("{} is empty", name.key())));
                    } else if report.records.contains_key(&rec.record_id) {
                        report.skipped.push(skip(format!("duplicate record id {}", rec.record_id)));
                    } else {
                        report.records.insert(rec.record_id.clone(), rec);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(id: &str, decision: &str) -> Value {
        json!({
            "record_id": id, "title": "t", "abstract": "a", "background": "b",
            "summary": "s", "claims": "c", "description": "d", "decision_label": decision
        })
    }

    #[test]
    fn ingest_filters_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.json"), rec("1", "ACCEPTED").to_string()).unwrap();
        let mut empty = rec("2", "ACCEPTED");
        empty["claims"] = json!("  ");
        let lines = [rec("3", "REJECTED"), empty, rec("4", "ACCEPTED"), rec("1", "ACCEPTED")]
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        fs::write(dir.path().join("b.jsonl"), lines).unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let r = ingest_dir(dir.path(), &FieldMapping::identity(), "ACCEPTED").unwrap();
        assert_eq!(r.records.keys().collect::<Vec<_>>(), ["1", "4"]);
        assert_eq!(r.skipped.len(), 3);
        assert!(r.skipped[1].reason.contains("claims"));
        assert_eq!(r.skipped[2].source, "b.jsonl:4");
    }

    #[test]
    fn hupd_mapping() {
        let v = json!({
            "application_number": 14123456, "title": "t", "abstract": "a", "background": "b",
            "summary": "s", "claims": "c", "full_description": "d", "decision": "ACCEPTED"
        });
        let r = FieldMapping::hupd().apply(&v).unwrap();
        assert_eq!(r.record_id, "14123456");
        assert_eq!(r.description, "d");
        assert!(FieldMapping::identity().apply(&v).is_err());
    }

    #[test]
    fn mapping_from_toml_defaults() {
        let m: FieldMapping = toml::from_str("description = \"full_description\"").unwrap();
        assert_eq!(m.description, "full_description");
        assert_eq!(m.title, "title");
    }
}
