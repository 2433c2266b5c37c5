//! Per-document scoring over a batch of (candidate, reference) pairs.

use serde::{Deserialize, Serialize};

use crate::irr::{irr_with, IrrConfig, DEFAULT_EPSILON};
use crate::length::{length_stats, LengthStats, TokenCounter};
use crate::overlap::{bleu_tokens, rouge_f1_tokens, BleuSettings, RougeVariant};
use crate::sentences::split_sentences;
use crate::text::{word_tokens, STOPWORD_LIST_ID};
use crate::{Exec, MetricsError};

#[derive(Debug, Clone)]
pub struct MetricSettings {
    pub thresholds: Vec<f64>,
    pub epsilon: f64,
    pub cap: Option<f64>,
    pub counter: TokenCounter,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            thresholds: vec![0.2, 0.4],
            epsilon: DEFAULT_EPSILON,
            cap: None,
            counter: TokenCounter::Whitespace,
        }
    }
}

impl MetricSettings {
    pub fn irr_config(&self, t: f64) -> IrrConfig {
        IrrConfig::new(t)
            .with_epsilon(self.epsilon)
            .with_cap(self.cap)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        for &t in &self.thresholds {
            self.irr_config(t).validate()?;
        }
        Ok(())
    }

    pub fn header(&self) -> SettingsHeader {
        SettingsHeader {
            thresholds: self.thresholds.clone(),
            epsilon: self.epsilon,
            cap: self.cap,
            stopword_list_id: STOPWORD_LIST_ID.to_string(),
            counter_id: self.counter.id(),
            bleu: BleuSettings::default(),
            tokenizer: "lowercase alphanumeric runs".to_string(),
        }
    }
}

/// Every metric setting, serialized at the top of each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsHeader {
    pub thresholds: Vec<f64>,
    pub epsilon: f64,
    pub cap: Option<f64>,
    pub stopword_list_id: String,
    pub counter_id: String,
    pub bleu: BleuSettings,
    pub tokenizer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrScore {
    pub t: f64,
    /// `None` when the document has fewer than two sentences.
    pub value: Option<f64>,
    pub raw_value: Option<f64>,
    pub pair_sum: u64,
    pub pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScores {
    pub doc_id: String,
    pub bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rougel: f64,
    pub irr: Vec<IrrScore>,
    pub length: LengthStats,
}

impl DocScores {
    pub fn irr_at(&self, t: f64) -> Option<f64> {
        self.irr.iter().find(|s| s.t == t).and_then(|s| s.value)
    }
}

pub struct DocPair<'a> {
    pub doc_id: &'a str,
    pub candidate: &'a str,
    pub reference: &'a str,
}

pub fn score_document(pair: &DocPair<'_>, settings: &MetricSettings) -> DocScores {
    let cand = word_tokens(pair.candidate);
    let refr = word_tokens(pair.reference);
    let sentences = split_sentences(pair.candidate);
    let irr = settings
        .thresholds
        .iter()
        .map(|&t| {
            let n = sentences.n() as u64;
            match irr_with(&sentences, &settings.irr_config(t), Exec::Sequential) {
                Ok(r) => IrrScore {
                    t,
                    value: Some(r.value),
                    raw_value: Some(r.raw_value),
                    pair_sum: r.pair_sum,
                    pairs: r.pairs,
                },
                Err(_) => IrrScore {
                    t,
                    value: None,
                    raw_value: None,
                    pair_sum: 0,
                    pairs: n.saturating_mul(n.saturating_sub(1)) / 2,
                },
            }
        })
        .collect();
    let pair_tokens = [(cand, refr)];
    let (cand, refr) = &pair_tokens[0];
    DocScores {
        doc_id: pair.doc_id.to_string(),
        bleu: bleu_tokens(&pair_tokens),
        rouge1: rouge_f1_tokens(cand, refr, RougeVariant::R1),
        rouge2: rouge_f1_tokens(cand, refr, RougeVariant::R2),
        rougel: rouge_f1_tokens(cand, refr, RougeVariant::Rl),
        irr,
        length: length_stats(pair.candidate, &settings.counter),
    }
}

/// Scores every pair; output order follows input order for either executor.
pub fn score_documents(
    pairs: &[DocPair<'_>],
    settings: &MetricSettings,
    exec: Exec,
) -> Result<Vec<DocScores>, MetricsError> {
    settings.validate()?;
    Ok(match exec {
        Exec::Sequential => pairs.iter().map(|p| score_document(p, settings)).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            pairs
                .par_iter()
                .map(|p| score_document(p, settings))
                .collect()
        }
    })
}
