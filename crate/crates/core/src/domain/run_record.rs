use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 of a text; used for prompt/response hashes and cache keys.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            temperature: 0.5,
            top_p: 0.9,
            max_tokens: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallLogEntry {
    pub agent_role: String,
    pub model_id: String,
    pub prompt_hash: String,
    pub response_hash: String,
    pub latency_ms: u64,
    /// Transport retries inside this call.
    pub retries: u32,
    /// 0 for the first attempt, 1.. for format-reminder re-asks.
    #[serde(default)]
    pub parse_retry: u32,
    #[serde(default)]
    pub cached: bool,
    /// `ok`, `length`, or the error text for failed calls.
    pub outcome: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model_id: String,
    pub sampling: Sampling,
    pub calls: Vec<CallLogEntry>,
    pub seed: u64,
}

impl RunRecord {
    pub fn calls_for(&self, role: &str) -> usize {
        self.calls.iter().filter(|c| c.agent_role == role).count()
    }
}

/// Append-only call log shared between concurrent tasks.
#[derive(Debug, Clone, Default)]
pub struct CallLog(Arc<Mutex<Vec<CallLogEntry>>>);

impl CallLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, entry: CallLogEntry) {
        self.0.lock().expect("call log poisoned").push(entry);
    }

    pub fn extend(&self, entries: impl IntoIterator<Item = CallLogEntry>) {
        self.0.lock().expect("call log poisoned").extend(entries);
    }

    pub fn snapshot(&self) -> Vec<CallLogEntry> {
        self.0.lock().expect("call log poisoned").clone()
    }

    /// Moves entries out, leaving the log empty.
    pub fn drain(&self) -> Vec<CallLogEntry> {
        std::mem::take(&mut *self.0.lock().expect("call log poisoned"))
    }

    pub fn len(&self) -> usize {
        self.0.lock().expect("call log poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
