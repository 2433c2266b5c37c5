//! N-gram overlap metrics: ROUGE-1/2/L F1 and corpus BLEU-4.
//!
//! Both tokenize with [`word_tokens`] (lowercase alphanumeric runs, no
//! stopword removal).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::word_tokens;
use crate::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeVariant {
    R1,
    R2,
    Rl,
}

impl fmt::Display for RougeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RougeVariant::R1 => "ROUGE-1",
            RougeVariant::R2 => "ROUGE-2",
            RougeVariant::Rl => "ROUGE-L",
        })
    }
}

/// Pinned BLEU settings; printed in every report header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuSettings {
    pub max_order: usize,
    pub smoothing: String,
    pub level: String,
    pub scale: f64,
}

impl Default for BleuSettings {
    fn default() -> Self {
        Self {
            max_order: BLEU_MAX_ORDER,
            smoothing: "add-one on zero-match orders n>=2".to_string(),
            level: "corpus".to_string(),
            scale: 100.0,
        }
    }
}

pub const BLEU_MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matches and candidate n-gram total.
fn clipped_matches(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, candidate.len().saturating_sub(n - 1))
}

fn f1(overlap: usize, cand_total: usize, ref_total: usize) -> f64 {
    if overlap == 0 || cand_total == 0 || ref_total == 0 {
        return 0.0;
    }
    let p = overlap as f64 / cand_total as f64;
    let r = overlap as f64 / ref_total as f64;
    2.0 * p * r / (p + r)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// ROUGE F1 in [0, 1].
///
/// When neither side has an n-gram of the requested order, the score is 1.0
/// if the token sequences are equal and 0.0 otherwise.
pub fn rouge_f1(candidate: &str, reference: &str, variant: RougeVariant) -> f64 {
    let cand = word_tokens(candidate);
    let refr = word_tokens(reference);
    rouge_f1_tokens(&cand, &refr, variant)
}

pub fn rouge_f1_tokens(cand: &[String], refr: &[String], variant: RougeVariant) -> f64 {
    let n = match variant {
        RougeVariant::R1 | RougeVariant::Rl => 1,
        RougeVariant::R2 => 2,
    };
    let cand_total = cand.len().saturating_sub(n - 1);
    let ref_total = refr.len().saturating_sub(n - 1);
    if cand_total == 0 && ref_total == 0 {
        return if cand == refr { 1.0 } else { 0.0 };
    }
    match variant {
        RougeVariant::R1 | RougeVariant::R2 => {
            let (overlap, _) = clipped_matches(cand, refr, n);
            f1(overlap, cand_total, ref_total)
        }
        RougeVariant::Rl => f1(lcs_len(cand, refr), cand.len(), refr.len()),
    }
}

/// Corpus-level BLEU-4 on a 0–100 scale.
///
/// Clipped matches and candidate n-gram totals are summed over the corpus.
/// For orders n ≥ 2 with zero matches the precision becomes
/// `1 / (total_n + 1)`; unigram precision is never smoothed, so a corpus with
/// no shared words scores exactly 0. The brevity penalty uses summed lengths.
pub fn bleu<C, R>(candidates: &[C], references: &[R]) -> Result<f64, MetricsError>
where
    C: AsRef<str>,
    R: AsRef<str>,
{
    if candidates.len() != references.len() {
        return Err(MetricsError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let pairs: Vec<(Vec<String>, Vec<String>)> = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| (word_tokens(c.as_ref()), word_tokens(r.as_ref())))
        .collect();
    Ok(bleu_tokens(&pairs))
}

pub fn bleu_tokens(pairs: &[(Vec<String>, Vec<String>)]) -> f64 {
    let mut matches = [0usize; BLEU_MAX_ORDER];
    let mut totals = [0usize; BLEU_MAX_ORDER];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (cand, refr) in pairs {
        cand_len += cand.len();
        ref_len += refr.len();
        for n in 1..=BLEU_MAX_ORDER {
            let (m, t) = clipped_matches(cand, refr, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }
    if cand_len == 0 || matches[0] == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..BLEU_MAX_ORDER {
        let p = if matches[n] == 0 {
            1.0 / (totals[n] as f64 + 1.0)
        } else {
            matches[n] as f64 / totals[n] as f64
        };
        log_sum += p.ln();
    }
    let geo = (log_sum / BLEU_MAX_ORDER as f64).exp();
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    (100.0 * bp * geo).min(100.0)
}
