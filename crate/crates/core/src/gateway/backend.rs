use super::{ChatRequest, FinishReason, Usage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendReply {
    pub content: String,
    pub finish_reason: FinishReason,
    pub usage: Usage,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendFailure {
    /// Connection-level failure (refused, reset, timeout).
    Transport(String),
    Status { code: u16, body: String },
}

impl BackendFailure {
    /// Transport failures, 429 and 5xx are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            BackendFailure::Transport(_) => true,
            BackendFailure::Status { code, .. } => *code == 429 || *code >= 500,
        }
    }
}

impl std::fmt::Display for BackendFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendFailure::Transport(m) => write!(f, "transport: {m}"),
            BackendFailure::Status { code, body } => write!(f, "status {code}: {body}"),
        }
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendFailure>;
}
