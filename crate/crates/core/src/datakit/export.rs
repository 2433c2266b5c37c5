//! Line-delimited SFT pair export, one file per split per kind.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DatakitError, PatentRecord, SplitManifest};
use crate::domain::{Draft, PatentDoc, RunRecord, SectionName, SectionOrder, SectionTexts};

pub const SFT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SftKind {
    D2T,
    D2A,
    D2B,
    D2S,
    D2C,
    D2W,
    #[serde(rename = "D2P_full")]
    D2PFull,
}

impl SftKind {
    pub const ALL: [SftKind; 7] = [
        SftKind::D2T,
        SftKind::D2A,
        SftKind::D2B,
        SftKind::D2S,
        SftKind::D2C,
        SftKind::D2W,
        SftKind::D2PFull,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SftKind::D2T => "D2T",
            SftKind::D2A => "D2A",
            SftKind::D2B => "D2B",
            SftKind::D2S => "D2S",
            SftKind::D2C => "D2C",
            SftKind::D2W => "D2W",
            SftKind::D2PFull => "D2P_full",
        }
    }

    fn section(self) -> Option<SectionName> {
        Some(match self {
            SftKind::D2T => SectionName::Title,
            SftKind::D2A => SectionName::Abstract,
            SftKind::D2B => SectionName::Background,
            SftKind::D2S => SectionName::Summary,
            SftKind::D2C => SectionName::Claims,
            _ => return None,
        })
    }
}

impl fmt::Display for SftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SftKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown SFT kind {s:?}"))
    }
}

/// Everything known about one accepted record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub record: PatentRecord,
    pub draft: Option<Draft>,
    /// First-level guideline list collected from the description.
    pub pgtree: Option<Vec<(usize, String)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub schema_version: u32,
    pub record_id: String,
    pub kind: SftKind,
    pub input: String,
    pub output: String,
}

/// Planner-format target: one `<Section-k>` block per line.
pub fn render_sections(sections: &[(usize, String)]) -> String {
    sections
        .iter()
        .map(|(k, t)| format!("<Section-{k}> {t} </Section-{k}>"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The training pair for one record, or `MissingTarget`.
pub fn sft_record(entry: &DatasetEntry, kind: SftKind) -> Result<SftRecord, DatakitError> {
    let id = &entry.record.record_id;
    let missing = || DatakitError::MissingTarget {
        record_id: id.clone(),
        kind,
    };
    let draft = entry.draft.as_ref().ok_or_else(missing)?;
    let output = match kind {
        SftKind::D2W => render_sections(entry.pgtree.as_ref().ok_or_else(missing)?),
        SftKind::D2PFull => {
            let mut texts = SectionTexts::default();
            for n in SectionName::ALL {
                texts.set(n, entry.record.section(n).to_string());
            }
            PatentDoc::from_sections(texts, SectionOrder::default(), RunRecord::default())
                .map_err(|_| missing())?
                .to_text()
        }
        _ => entry.record.section(kind.section().expect("component kind")).to_string(),
    };
    if output.trim().is_empty() {
        return Err(missing());
    }
    Ok(SftRecord {
        schema_version: SFT_SCHEMA_VERSION,
        record_id: id.clone(),
        kind,
        input: draft.render(),
        output,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportReport {
    /// (split, kind) → lines written.
    pub written: BTreeMap<String, usize>,
    pub missing: Vec<(String, SftKind)>,
}

impl ExportReport {
    pub fn count(&self, split: &str, kind: SftKind) -> usize {
        self.written.get(&format!("{split}/{kind}")).copied().unwrap_or(0)
    }
}

/// Writes `<out>/<split>/<kind>.jsonl` for each split. Records without a
/// target are left out and reported.
pub fn export_sft(
    kind: SftKind,
    manifest: &SplitManifest,
    entries: &BTreeMap<String, DatasetEntry>,
    out_dir: &Path,
    report: &mut ExportReport,
) -> Result<(), DatakitError> {
    for (split, ids) in manifest.splits() {
        let dir = out_dir.join(split);
        fs::create_dir_all(&dir).map_err(|e| DatakitError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{kind}.jsonl"));
        let mut f = fs::File::create(&path).map_err(|e| DatakitError::Io(format!("{}: {e}", path.display())))?;
        let mut n = 0;
        for id in ids {
            let rec = entries
                .get(id)
                .ok_or_else(|| DatakitError::MissingTarget {
                    record_id: id.clone(),
                    kind,
                })
                .and_then(|e| sft_record(e, kind));
            match rec {
                Ok(r) => {
                    let line = serde_json::to_string(&r).expect("record serializes");
                    writeln!(f, "{line}").map_err(|e| DatakitError::Io(format!("{}: {e}", path.display())))?;
                    n += 1;
                }
                Err(DatakitError::MissingTarget { record_id, kind }) => report.missing.push((record_id, kind)),
                Err(e) => return Err(e),
            }
        }
        report.written.insert(format!("{split}/{kind}"), n);
    }
    Ok(())
}
