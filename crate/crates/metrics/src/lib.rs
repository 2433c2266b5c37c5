//! Evaluation metrics for generated long documents.
//!
//! * [`irr`]: Inverse Repetition Rate over stopword-filtered sentence Jaccard
//!   similarity.
//! * [`overlap`]: ROUGE-1/2/L F1 and corpus BLEU-4.
//! * [`length`]: token, word, sentence and character counts.
//! * [`batch`]: per-document scoring over many documents.
//!
//! With the default `parallel` feature the pairwise IRR sweep and batch
//! scoring can run on rayon; [`Exec::Sequential`] is always available and
//! produces identical results.

pub mod batch;
pub mod irr;
pub mod length;
pub mod overlap;
pub mod sentences;
pub mod text;

pub use batch::{score_document, score_documents, DocPair, DocScores, IrrScore, MetricSettings, SettingsHeader};
pub use irr::{irr, irr_with, jaccard, rep_indicator, IrrConfig, IrrReport, DEFAULT_EPSILON};
pub use length::{length_stats, BpeVocab, LengthStats, TokenCounter};
pub use overlap::{bleu, rouge_f1, BleuSettings, RougeVariant};
pub use sentences::{split_sentences, Sentence, SentenceSet};
pub use text::{content_tokens, word_tokens, STOPWORD_LIST_ID};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("IRR is undefined for {n} sentence(s); at least two are required")]
    Undefined { n: usize },
    #[error("candidate/reference count mismatch: {candidates} vs {references}")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("BLEU needs at least one candidate/reference pair")]
    EmptyCorpus,
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("cap must be positive, got {0}")]
    InvalidCap(f64),
    #[error("invalid token counter: {0}")]
    CounterConfig(String),
}

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}
