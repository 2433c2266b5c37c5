//! Benchmark reports: JSON, CSV rows, and a fixed-width table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use patentsmith_metrics::{DocScores, SettingsHeader};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub metrics: SettingsHeader,
    pub model_ids: Vec<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Scored,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub doc_id: String,
    pub status: RowStatus,
    pub bleu: Option<f64>,
    pub rouge1: Option<f64>,
    pub rouge2: Option<f64>,
    pub rougel: Option<f64>,
    /// One value per header threshold; `None` below two sentences.
    pub irr: Vec<Option<f64>>,
    pub tokens: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRow {
    pub fn scored(s: &DocScores) -> Self {
        Self {
            doc_id: s.doc_id.clone(),
            status: RowStatus::Scored,
            bleu: Some(s.bleu),
            rouge1: Some(s.rouge1),
            rouge2: Some(s.rouge2),
            rougel: Some(s.rougel),
            irr: s.irr.iter().map(|i| i.value).collect(),
            tokens: Some(s.length.tokens),
            error: None,
        }
    }

    pub fn failed(doc_id: &str, thresholds: usize, error: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.to_string(),
            status: RowStatus::Failed,
            bleu: None,
            rouge1: None,
            rouge2: None,
            rougel: None,
            irr: vec![None; thresholds],
            tokens: None,
            error: Some(error.into()),
        }
    }
}

/// Means over the rows where each value is defined, with the counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scored: usize,
    pub failed: usize,
    pub bleu: Option<f64>,
    pub rouge1: Option<f64>,
    pub rouge2: Option<f64>,
    pub rougel: Option<f64>,
    pub irr: Vec<Option<f64>>,
    /// Rows contributing to each IRR mean.
    pub irr_count: Vec<usize>,
    pub tokens: Option<f64>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

impl Aggregate {
    pub fn of(rows: &[ReportRow], thresholds: usize) -> Self {
        let (irr, irr_count) = (0..thresholds)
            .map(|k| mean(rows.iter().map(|r| r.irr.get(k).copied().flatten())))
            .unzip();
        Self {
            scored: rows.iter().filter(|r| r.status == RowStatus::Scored).count(),
            failed: rows.iter().filter(|r| r.status == RowStatus::Failed).count(),
            bleu: mean(rows.iter().map(|r| r.bleu)).0,
            rouge1: mean(rows.iter().map(|r| r.rouge1)).0,
            rouge2: mean(rows.iter().map(|r| r.rouge2)).0,
            rougel: mean(rows.iter().map(|r| r.rougel)).0,
            irr,
            irr_count,
            tokens: mean(rows.iter().map(|r| r.tokens.map(|t| t as f64))).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub header: ReportHeader,
    pub rows: Vec<ReportRow>,
    pub aggregate: Aggregate,
}

fn irr_label(t: f64) -> String {
    format!("IRR (t={t})")
}

fn cell(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

impl BenchReport {
    /// Rows sorted by doc id; the aggregate is recomputed from them.
    pub fn new(header: ReportHeader, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        let aggregate = Aggregate::of(&rows, header.metrics.thresholds.len());
        Self { header, rows, aggregate }
    }

    pub fn row(&self, doc_id: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.doc_id == doc_id)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head: Vec<String> = ["doc_id", "status", "bleu", "rouge1", "rouge2", "rougel"]
            .map(String::from)
            .to_vec();
        head.extend(self.header.metrics.thresholds.iter().map(|t| format!("irr_t{t}")));
        head.push("tokens".into());
        w.write_record(&head).map_err(|e| CliError::Io(e.to_string()))?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let status = match r.status {
                RowStatus::Scored => "scored",
                RowStatus::Failed => "failed",
            };
            let mut rec = vec![r.doc_id.clone(), status.into(), opt(r.bleu), opt(r.rouge1), opt(r.rouge2), opt(r.rougel)];
            rec.extend(r.irr.iter().map(|v| opt(*v)));
            rec.push(r.tokens.map(|t| t.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_table(&self) -> String {
        let h = &self.header;
        let m = &h.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "models: {}", h.model_ids.join(", "));
        let _ = writeln!(
            out,
            "seed: {}",
            h.seed.map_or_else(|| "-".to_string(), |s| s.to_string())
        );
        let _ = writeln!(
            out,
            "metrics: thresholds={:?} epsilon={} cap={} stopwords={} tokens={} bleu=max_order {} ({})",
            m.thresholds,
            m.epsilon,
            m.cap.map_or_else(|| "none".to_string(), |c| c.to_string()),
            m.stopword_list_id,
            m.counter_id,
            m.bleu.max_order,
            m.bleu.smoothing,
        );
        let mut cols: Vec<String> = ["Doc", "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L"].map(String::from).to_vec();
        cols.extend(m.thresholds.iter().map(|t| irr_label(*t)));
        cols.push("Avg #Tokens".into());
        let mut lines: Vec<Vec<String>> = Vec::new();
        for r in &self.rows {
            let mut l = vec![
                if r.status == RowStatus::Failed { format!("{} (failed)", r.doc_id) } else { r.doc_id.clone() },
                cell(r.bleu, 2),
                cell(r.rouge1, 4),
                cell(r.rouge2, 4),
                cell(r.rougel, 4),
            ];
            l.extend(r.irr.iter().map(|v| cell(*v, 4)));
            l.push(r.tokens.map_or_else(|| "-".to_string(), |t| t.to_string()));
            lines.push(l);
        }
        let a = &self.aggregate;
        let mut l = vec![
            format!("mean ({} scored, {} failed)", a.scored, a.failed),
            cell(a.bleu, 2),
            cell(a.rouge1, 4),
            cell(a.rouge2, 4),
            cell(a.rougel, 4),
        ];
        l.extend(a.irr.iter().map(|v| cell(*v, 4)));
        l.push(cell(a.tokens, 1));
        lines.push(l);

        let widths: Vec<usize> = (0..cols.len())
            .map(|i| lines.iter().map(|l| l[i].len()).chain([cols[i].len()]).max().unwrap_or(0))
            .collect();
        let fmt_line = |l: &[String]| {
            l.iter()
                .enumerate()
                .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", fmt_line(&cols));
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        let n = lines.len();
        for (k, l) in lines.iter().enumerate() {
            if k == n - 1 && n > 1 {
                let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            }
            let _ = writeln!(out, "{}", fmt_line(l));
        }
        out
    }

    /// Writes `report.json`, `report.csv`, and `report.txt` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let w = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        };
        w(
            "report.json",
            serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))? + "\n",
        )?;
        w("report.csv", self.to_csv()?)?;
        w("report.txt", self.to_table())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}
