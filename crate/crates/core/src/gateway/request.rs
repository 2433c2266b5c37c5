use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GatewayError;
use crate::domain::Sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    /// Agent role; recorded in the call log, never part of the cache key.
    pub request_tag: String,
    /// Format-reminder attempt number, for the call log only.
    #[serde(default)]
    pub parse_retry: u32,
}

impl ChatRequest {
    pub fn new(model_id: impl Into<String>, tag: impl Into<String>, messages: Vec<Message>) -> Self {
        let s = Sampling::default();
        Self {
            model_id: model_id.into(),
            messages,
            temperature: s.temperature,
            top_p: s.top_p,
            max_tokens: s.max_tokens,
            request_tag: tag.into(),
            parse_retry: 0,
        }
    }

    pub fn with_sampling(mut self, s: Sampling) -> Self {
        self.temperature = s.temperature;
        self.top_p = s.top_p;
        self.max_tokens = s.max_tokens;
        self
    }

    /// The text rules in a mock playbook are matched against: all message
    /// contents joined by blank lines.
    pub fn rendered_prompt(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    pub fn validate(&self, limits: &ModelLimits) -> Result<(), GatewayError> {
        let bad = |msg: String| Err(GatewayError::InvalidRequest(msg));
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty".into());
        }
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return bad("request has no user message".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p {} outside (0, 1]", self.top_p));
        }
        let limit = limits.limit(&self.model_id);
        if self.max_tokens == 0 || self.max_tokens > limit {
            return bad(format!(
                "max_tokens {} outside 1..={limit} for model {}",
                self.max_tokens, self.model_id
            ));
        }
        Ok(())
    }
}

/// Stable hex hash over model id, messages, and sampling parameters.
pub fn cache_key(req: &ChatRequest) -> String {
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(req.model_id.as_bytes());
    field(&(req.messages.len() as u64).to_le_bytes());
    for m in &req.messages {
        field(m.role.as_str().as_bytes());
        field(m.content.as_bytes());
    }
    field(&req.temperature.to_bits().to_le_bytes());
    field(&req.top_p.to_bits().to_le_bytes());
    field(&req.max_tokens.to_le_bytes());
    hex::encode(h.finalize())
}

/// Per-model `max_tokens` ceilings. Models not listed get `default_limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLimits {
    pub default_limit: u32,
    #[serde(default)]
    pub per_model: BTreeMap<String, u32>,
}

impl Default for ModelLimits {
    fn default() -> Self {
        Self {
            default_limit: 32_768,
            per_model: BTreeMap::new(),
        }
    }
}

impl ModelLimits {
    pub fn limit(&self, model_id: &str) -> u32 {
        self.per_model.get(model_id).copied().unwrap_or(self.default_limit)
    }

    pub fn with(mut self, model_id: impl Into<String>, limit: u32) -> Self {
        self.per_model.insert(model_id.into(), limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: FinishReason,
    pub usage: Usage,
    pub cached: bool,
}

impl ChatResponse {
    /// Builds a response, forcing `finish_reason = error` for empty content.
    pub fn new(content: String, finish_reason: FinishReason, usage: Usage) -> Self {
        let finish_reason = if content.is_empty() {
            FinishReason::Error
        } else {
            finish_reason
        };
        Self {
            content,
            finish_reason,
            usage,
            cached: false,
        }
    }

    pub fn is_overlong(&self) -> bool {
        self.finish_reason == FinishReason::Length
    }
}
