//! Scripted backend for deterministic runs.
//!
//! Playbook file shape:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "rules": [
//!     {"match": {"substring": "patent title"}, "responses": ["<Title>X</Title>"]},
//!     {"match": {"regex": "Section-\\d"}, "responses": [{"status": 500}, "ok"]}
//!   ],
//!   "default_response": "fallback"
//! }
//! ```
//!
//! A response entry is either plain text, `{"content": .., "finish_reason": ..}`,
//! `{"status": code}` for an HTTP-style failure, or `{"transport_error": msg}`.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::backend::{Backend, BackendFailure, BackendReply};
use super::{ChatRequest, FinishReason, GatewayError, Usage};

pub const PLAYBOOK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Substring(String),
    Regex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockReply {
    Text(String),
    Full {
        content: String,
        #[serde(default = "stop")]
        finish_reason: FinishReason,
    },
    Status {
        status: u16,
    },
    Transport {
        transport_error: String,
    },
}

fn stop() -> FinishReason {
    FinishReason::Stop
}

impl From<&str> for MockReply {
    fn from(s: &str) -> Self {
        MockReply::Text(s.to_string())
    }
}

impl From<String> for MockReply {
    fn from(s: String) -> Self {
        MockReply::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub matcher: Matcher,
    pub responses: Vec<MockReply>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockPlaybook {
    #[serde(default = "schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_response: Option<String>,
}

fn schema() -> u32 {
    PLAYBOOK_SCHEMA_VERSION
}

impl MockPlaybook {
    pub fn new() -> Self {
        Self {
            schema_version: PLAYBOOK_SCHEMA_VERSION,
            ..Self::default()
        }
    }

    pub fn rule<R: Into<MockReply>>(
        mut self,
        matcher: Matcher,
        responses: impl IntoIterator<Item = R>,
    ) -> Self {
        self.rules.push(MockRule {
            matcher,
            responses: responses.into_iter().map(Into::into).collect(),
        });
        self
    }

    pub fn on<R: Into<MockReply>>(self, substring: &str, responses: impl IntoIterator<Item = R>) -> Self {
        self.rule(Matcher::Substring(substring.to_string()), responses)
    }

    pub fn default_response(mut self, text: impl Into<String>) -> Self {
        self.default_response = Some(text.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, GatewayError> {
        let pb: Self =
            serde_json::from_str(text).map_err(|e| GatewayError::Config(format!("mock playbook: {e}")))?;
        if pb.schema_version != PLAYBOOK_SCHEMA_VERSION {
            return Err(GatewayError::Config(format!(
                "mock playbook schema_version {} unsupported (expected {PLAYBOOK_SCHEMA_VERSION})",
                pb.schema_version
            )));
        }
        Ok(pb)
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

enum CompiledMatcher {
    Substring(String),
    Regex(Regex),
}

impl CompiledMatcher {
    fn is_match(&self, prompt: &str) -> bool {
        match self {
            CompiledMatcher::Substring(s) => prompt.contains(s.as_str()),
            CompiledMatcher::Regex(r) => r.is_match(prompt),
        }
    }
}

pub struct MockBackend {
    matchers: Vec<CompiledMatcher>,
    playbook: MockPlaybook,
    cursors: Mutex<Vec<usize>>,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(playbook: MockPlaybook) -> Result<Self, GatewayError> {
        let matchers = playbook
            .rules
            .iter()
            .map(|r| match &r.matcher {
                Matcher::Substring(s) => Ok(CompiledMatcher::Substring(s.clone())),
                Matcher::Regex(p) => Regex::new(p)
                    .map(CompiledMatcher::Regex)
                    .map_err(|e| GatewayError::Config(format!("mock rule regex {p:?}: {e}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(i) = playbook.rules.iter().position(|r| r.responses.is_empty()) {
            return Err(GatewayError::Config(format!("mock rule {i} has no responses")));
        }
        let cursors = Mutex::new(vec![0; playbook.rules.len()]);
        Ok(Self {
            matchers,
            playbook,
            cursors,
            calls: AtomicUsize::new(0),
        })
    }

    /// Number of requests that reached the backend.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn pick(&self, prompt: &str) -> Option<MockReply> {
        let idx = self.matchers.iter().position(|m| m.is_match(prompt));
        match idx {
            Some(i) => {
                let responses = &self.playbook.rules[i].responses;
                let mut cursors = self.cursors.lock().expect("mock cursor lock poisoned");
                let at = cursors[i].min(responses.len() - 1);
                cursors[i] += 1;
                Some(responses[at].clone())
            }
            None => self.playbook.default_response.clone().map(MockReply::Text),
        }
    }
}

fn word_count(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendFailure> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let prompt = req.rendered_prompt();
        let reply = self.pick(&prompt).ok_or_else(|| BackendFailure::Status {
            code: 404,
            body: "no mock playbook rule matched the prompt and no default_response is set".into(),
        })?;
        let (content, finish_reason) = match reply {
            MockReply::Text(t) => (t, FinishReason::Stop),
            MockReply::Full {
                content,
                finish_reason,
            } => (content, finish_reason),
            MockReply::Status { status } => {
                return Err(BackendFailure::Status {
                    code: status,
                    body: format!("scripted status {status}"),
                })
            }
            MockReply::Transport { transport_error } => {
                return Err(BackendFailure::Transport(transport_error))
            }
        };
        Ok(BackendReply {
            usage: Usage {
                prompt_tokens: word_count(&prompt),
                completion_tokens: word_count(&content),
            },
            content,
            finish_reason,
            latency_ms: 0,
        })
    }
}
