//! Domain types shared by every stage: drafts, guideline trees, the
//! reference bundle, review verdicts, and the assembled patent.
//!
//! All types are plain immutable data once constructed and are `Send + Sync`.

mod draft;
mod patent;
mod pgtree;
mod rrag;
mod run_record;

pub use draft::{question_text, render_draft, Draft, DraftError, DraftFile, DraftFileEntry, DraftQA, QUESTIONS};
pub use patent::{
    assemble_patent, parse_patent_text, DocStatus, ParsedPatentText, PatentDoc, SectionName, SectionOrder,
    SectionTexts, PATENT_SCHEMA_VERSION,
};
pub use pgtree::{GuidelineNode, NodeId, PgTree, SectionPlan};
pub use rrag::{
    Reference, RetrievedContext, ReviewVerdict, RoundRecord, SubsectionDraft, SubsectionStatus, Verdict,
};
pub use run_record::{content_hash, CallLog, CallLogEntry, RunRecord, Sampling};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error(transparent)]
    Draft(#[from] DraftError),
    #[error("section \"{0}\" is empty")]
    EmptySection(SectionName),
    #[error("invalid guideline tree: {0}")]
    InvalidTree(String),
    #[error("review advice must not be empty")]
    EmptyAdvice,
    #[error("invalid section order: {0}")]
    InvalidOrder(String),
    #[error("parse error: {0}")]
    Parse(String),
}
