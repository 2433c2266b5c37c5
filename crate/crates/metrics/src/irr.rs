//! Inverse Repetition Rate.
//!
//! `IRR(P, t) = C(n, 2) / (Σ_{i<j} f(s_i, s_j) + ε)` where `f` is 1 when the
//! stopword-filtered Jaccard similarity of two sentences reaches `t`. Higher
//! means fewer near-duplicate sentence pairs. Repetition-free text scores
//! `C(n, 2) / ε`, which is why an optional report-level cap exists.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::sentences::SentenceSet;
use crate::text::STOPWORD_LIST_ID;
use crate::{Exec, MetricsError};

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrConfig {
    pub t: f64,
    pub epsilon: f64,
    pub stopword_list_id: String,
    pub cap: Option<f64>,
}

impl IrrConfig {
    pub fn new(t: f64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_cap(mut self, cap: Option<f64>) -> Self {
        self.cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(0.0..=1.0).contains(&self.t) {
            return Err(MetricsError::InvalidThreshold(self.t));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(MetricsError::InvalidEpsilon(self.epsilon));
        }
        if let Some(cap) = self.cap {
            if cap.is_nan() || cap <= 0.0 {
                return Err(MetricsError::InvalidCap(cap));
            }
        }
        Ok(())
    }
}

impl Default for IrrConfig {
    fn default() -> Self {
        Self {
            t: 0.2,
            epsilon: DEFAULT_EPSILON,
            stopword_list_id: STOPWORD_LIST_ID.to_string(),
            cap: None,
        }
    }
}

/// IRR value plus the raw quantities it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrReport {
    pub value: f64,
    /// Value before the cap was applied.
    pub raw_value: f64,
    pub n: usize,
    /// `C(n, 2)`.
    pub pairs: u64,
    /// Number of pairs with Jaccard ≥ t.
    pub pair_sum: u64,
    pub capped: bool,
    pub config: IrrConfig,
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as identical (1.0).
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// 1 iff `jaccard(a, b) >= t`.
pub fn rep_indicator(a: &BTreeSet<String>, b: &BTreeSet<String>, t: f64) -> u8 {
    u8::from(jaccard(a, b) >= t)
}

pub fn irr(set: &SentenceSet, cfg: &IrrConfig) -> Result<IrrReport, MetricsError> {
    irr_with(set, cfg, Exec::default())
}

pub fn irr_with(set: &SentenceSet, cfg: &IrrConfig, exec: Exec) -> Result<IrrReport, MetricsError> {
    cfg.validate()?;
    let n = set.n();
    if n < 2 {
        return Err(MetricsError::Undefined { n });
    }
    let interned = intern(set);
    let pair_sum = match exec {
        Exec::Sequential => pair_sum_sequential(&interned, cfg.t),
        #[cfg(feature = "parallel")]
        Exec::Parallel => pair_sum_parallel(&interned, cfg.t),
    };
    Ok(finish(n, pair_sum, cfg))
}

fn finish(n: usize, pair_sum: u64, cfg: &IrrConfig) -> IrrReport {
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let raw_value = pairs as f64 / (pair_sum as f64 + cfg.epsilon);
    let (value, capped) = match cfg.cap {
        Some(cap) if raw_value > cap => (cap, true),
        _ => (raw_value, false),
    };
    IrrReport {
        value,
        raw_value,
        n,
        pairs,
        pair_sum,
        capped,
        config: cfg.clone(),
    }
}

/// Sentences as sorted token-id vectors so pair comparisons are merge scans.
fn intern(set: &SentenceSet) -> Vec<Vec<u32>> {
    let mut ids: HashMap<&str, u32> = HashMap::new();
    set.sentences
        .iter()
        .map(|s| {
            let mut v: Vec<u32> = s
                .tokens
                .iter()
                .map(|tok| {
                    let next = ids.len() as u32;
                    *ids.entry(tok.as_str()).or_insert(next)
                })
                .collect();
            v.sort_unstable();
            v
        })
        .collect()
}

fn repeats(a: &[u32], b: &[u32], t: f64) -> bool {
    if a.is_empty() && b.is_empty() {
        return 1.0 >= t;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64 >= t
}

fn row_count(sets: &[Vec<u32>], i: usize, t: f64) -> u64 {
    sets[i + 1..]
        .iter()
        .filter(|other| repeats(&sets[i], other, t))
        .count() as u64
}

fn pair_sum_sequential(sets: &[Vec<u32>], t: f64) -> u64 {
    (0..sets.len()).map(|i| row_count(sets, i, t)).sum()
}

#[cfg(feature = "parallel")]
fn pair_sum_parallel(sets: &[Vec<u32>], t: f64) -> u64 {
    use rayon::prelude::*;
    (0..sets.len())
        .into_par_iter()
        .map(|i| row_count(sets, i, t))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentences::{Sentence, SentenceSet};

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn doc(sentences: &[&str]) -> SentenceSet {
        sentences.iter().map(|s| Sentence::new(*s)).collect()
    }

    #[test]
    fn jaccard_examples() {
        let a = set(&["novel", "method", "system"]);
        let b = set(&["method", "system", "device"]);
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &set(&["x", "y"])), 0.0);
        assert_eq!(jaccard(&a, &b), 0.5);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
        assert_eq!(jaccard(&a, &set(&[])), 0.0);
    }

    #[test]
    fn indicator_boundary_is_inclusive() {
        // J = 2/5 = 0.4
        let a = set(&["a1", "a2", "a3", "a4"]);
        let b = set(&["a1", "a2", "b3"]);
        assert_eq!(jaccard(&a, &b), 0.4);
        assert_eq!(rep_indicator(&a, &b, 0.4), 1);
        assert_eq!(rep_indicator(&a, &b, 0.41), 0);
        assert_eq!(rep_indicator(&a, &a, 0.0), 1);
    }

    #[test]
    fn undefined_below_two_sentences() {
        let cfg = IrrConfig::new(0.2);
        assert_eq!(
            irr(&doc(&[]), &cfg).unwrap_err(),
            MetricsError::Undefined { n: 0 }
        );
        assert_eq!(
            irr(&doc(&["One sentence only."]), &cfg).unwrap_err(),
            MetricsError::Undefined { n: 1 }
        );
    }

    #[test]
    fn cap_is_applied_and_reported() {
        let d = doc(&["alpha beta gamma.", "delta epsilon zeta."]);
        let cfg = IrrConfig::new(0.2).with_cap(Some(100.0));
        let r = irr(&d, &cfg).unwrap();
        assert!(r.capped);
        assert_eq!(r.value, 100.0);
        assert_eq!(r.pair_sum, 0);
        assert_eq!(r.raw_value, 1.0 / 1e-6);
    }

    #[test]
    fn invalid_config_rejected() {
        let d = doc(&["a b c.", "d e f."]);
        assert!(matches!(
            irr(&d, &IrrConfig::new(1.5)),
            Err(MetricsError::InvalidThreshold(_))
        ));
        assert!(matches!(
            irr(&d, &IrrConfig::new(0.5).with_epsilon(0.0)),
            Err(MetricsError::InvalidEpsilon(_))
        ));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn sequential_and_parallel_agree() {
        let d = doc(&[
            "The pump moves fluid.",
            "The pump moves the fluid quickly.",
            "A valve controls the flow.",
            "A valve controls flow rate.",
            "Unrelated sentence about weather.",
        ]);
        for t in [0.0, 0.2, 0.4, 0.6, 1.0] {
            let cfg = IrrConfig::new(t);
            let a = irr_with(&d, &cfg, Exec::Sequential).unwrap();
            let b = irr_with(&d, &cfg, Exec::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }
}
