use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The five inventor-interview questions, in order.
pub const QUESTIONS: [&str; 5] = [
    "What is the technical problem that this patent aims to solve?",
    "What is the technical background of this invention, the most similar existing solutions, and its advantages over these solutions?",
    "What is the detailed technical solution of the invention?",
    "What are the key points of the invention, and which points are intended to be protected?",
    "What is the detailed description of each figure individually?",
];

pub fn question_text(id: u8) -> Option<&'static str> {
    (1..=5).contains(&id).then(|| QUESTIONS[usize::from(id) - 1])
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DraftError {
    #[error("draft is missing question {id}: \"{text}\"")]
    MissingQuestion { id: u8, text: &'static str },
    #[error("question {0} appears more than once")]
    DuplicateQuestion(u8),
    #[error("unknown question id {0}; ids run from 1 to 5")]
    UnknownQuestion(u8),
    #[error("question {id} text does not match the canonical question \"{expected}\"")]
    QuestionMismatch { id: u8, expected: &'static str },
    #[error("answer to question {0} is empty")]
    EmptyAnswer(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftQA {
    pub question_id: u8,
    pub question_text: String,
    pub answer_text: String,
}

impl DraftQA {
    pub fn new(question_id: u8, answer_text: impl Into<String>) -> Result<Self, DraftError> {
        let text = question_text(question_id).ok_or(DraftError::UnknownQuestion(question_id))?;
        Ok(Self {
            question_id,
            question_text: text.to_string(),
            answer_text: answer_text.into(),
        })
    }
}

/// Serialized shape of a draft file. `question_text` may be omitted, in
/// which case the canonical text is filled in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DraftFile {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    pub qa: Vec<DraftFileEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DraftFileEntry {
    pub question_id: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_text: Option<String>,
    pub answer_text: String,
}

fn default_schema() -> u32 {
    1
}

/// An inventor's technical draft: exactly five question/answer pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DraftFile", into = "DraftFile")]
pub struct Draft {
    qa: Vec<DraftQA>,
    source_id: Option<String>,
}

impl Draft {
    pub fn new(mut qa: Vec<DraftQA>, source_id: Option<String>) -> Result<Self, DraftError> {
        let mut seen = [false; 5];
        for entry in &qa {
            let expected = question_text(entry.question_id)
                .ok_or(DraftError::UnknownQuestion(entry.question_id))?;
            let slot = &mut seen[usize::from(entry.question_id) - 1];
            if *slot {
                return Err(DraftError::DuplicateQuestion(entry.question_id));
            }
            *slot = true;
            if normalize_ws(&entry.question_text) != normalize_ws(expected) {
                return Err(DraftError::QuestionMismatch {
                    id: entry.question_id,
                    expected,
                });
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(DraftError::MissingQuestion {
                id: i as u8 + 1,
                text: QUESTIONS[i],
            });
        }
        if let Some(empty) = qa.iter().find(|e| e.answer_text.trim().is_empty()) {
            return Err(DraftError::EmptyAnswer(empty.question_id));
        }
        qa.sort_by_key(|e| e.question_id);
        Ok(Self { qa, source_id })
    }

    /// Builds a draft from the five answers in question order.
    pub fn from_answers<S: Into<String>>(
        answers: [S; 5],
        source_id: Option<String>,
    ) -> Result<Self, DraftError> {
        let qa = answers
            .into_iter()
            .enumerate()
            .map(|(i, a)| DraftQA::new(i as u8 + 1, a))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(qa, source_id)
    }

    pub fn qa(&self) -> &[DraftQA] {
        &self.qa
    }

    pub fn answer(&self, question_id: u8) -> Option<&str> {
        self.qa
            .iter()
            .find(|e| e.question_id == question_id)
            .map(|e| e.answer_text.as_str())
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    /// Canonical text form: for each pair, the question line then the
    /// answer block, pairs separated by a blank line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.qa.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            let _ = write!(
                out,
                "Question {}: {}\nAnswer {}: {}",
                e.question_id, e.question_text, e.question_id, e.answer_text
            );
        }
        out
    }
}

pub fn render_draft(d: &Draft) -> String {
    d.render()
}

impl TryFrom<DraftFile> for Draft {
    type Error = DraftError;

    fn try_from(file: DraftFile) -> Result<Self, Self::Error> {
        let qa = file
            .qa
            .into_iter()
            .map(|e| {
                let canonical =
                    question_text(e.question_id).ok_or(DraftError::UnknownQuestion(e.question_id))?;
                Ok(DraftQA {
                    question_id: e.question_id,
                    question_text: e.question_text.unwrap_or_else(|| canonical.to_string()),
                    answer_text: e.answer_text,
                })
            })
            .collect::<Result<Vec<_>, DraftError>>()?;
        Draft::new(qa, file.source_id)
    }
}

impl From<Draft> for DraftFile {
    fn from(d: Draft) -> Self {
        DraftFile {
            schema_version: 1,
            source_id: d.source_id,
            qa: d
                .qa
                .into_iter()
                .map(|e| DraftFileEntry {
                    question_id: e.question_id,
                    question_text: Some(e.question_text),
                    answer_text: e.answer_text,
                })
                .collect(),
        }
    }
}
