//! Uniform access to chat-completion backends with retries, an on-disk
//! response cache, a shared rate limiter, and a scripted mock.

mod backend;
mod cache;
mod config;
mod http;
mod limits;
mod mock;
mod request;

use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;
use tracing::{debug, warn};

pub use backend::{Backend, BackendFailure, BackendReply};
pub use cache::{CachedResponse, ResponseCache};
pub use config::{BackendConfig, BackendKind, BACKEND_SCHEMA_VERSION};
pub use http::HttpBackend;
pub use limits::{RateLimiter, RetryPolicy};
pub use mock::{Matcher, MockBackend, MockPlaybook, MockReply, MockRule, PLAYBOOK_SCHEMA_VERSION};
pub use request::{cache_key, ChatRequest, ChatResponse, FinishReason, Message, ModelLimits, Role, Usage};

use crate::domain::{content_hash, CallLog, CallLogEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("backend returned status {code}: {body}")]
    BadStatus { code: u16, body: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("backend config: {0}")]
    Config(String),
}

#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn Backend>,
    cache: Option<Arc<ResponseCache>>,
    limiter: Option<Arc<RateLimiter>>,
    retry: RetryPolicy,
    limits: ModelLimits,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("backend", &self.backend.name())
            .field("cache", &self.cache.as_ref().map(|c| c.dir().to_path_buf()))
            .field("retry", &self.retry)
            .finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            cache: None,
            limiter: None,
            retry: RetryPolicy::default(),
            limits: ModelLimits::default(),
        }
    }

    pub fn mock(playbook: MockPlaybook) -> Result<(Self, Arc<MockBackend>), GatewayError> {
        let backend = Arc::new(MockBackend::new(playbook)?);
        let gw = Self::new(backend.clone()).with_retry(RetryPolicy::no_delay(RetryPolicy::default().retry_max));
        Ok((gw, backend))
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(Arc::new(cache));
        self
    }

    pub fn with_rate_limit(mut self, limiter: RateLimiter) -> Self {
        self.limiter = Some(Arc::new(limiter));
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_limits(mut self, limits: ModelLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        self.retry
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Sends `req`, retrying transient failures, and appends exactly one
    /// entry to `log` whatever the outcome. A `length` finish reason is
    /// returned to the caller, not raised.
    pub fn complete(&self, req: &ChatRequest, log: &CallLog) -> Result<ChatResponse, GatewayError> {
        req.validate(&self.limits)?;
        let key = cache_key(req);
        let prompt_hash = content_hash(&req.rendered_prompt());
        let entry = |response_hash: String, latency_ms, retries, cached, outcome: String| CallLogEntry {
            agent_role: req.request_tag.clone(),
            model_id: req.model_id.clone(),
            prompt_hash: prompt_hash.clone(),
            response_hash,
            latency_ms,
            retries,
            parse_retry: req.parse_retry,
            cached,
            outcome,
        };

        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            debug!(tag = %req.request_tag, key = %key, "cache hit");
            log.push(entry(content_hash(&hit.content), 0, 0, true, outcome_label(hit.finish_reason)));
            return Ok(ChatResponse {
                content: hit.content,
                finish_reason: hit.finish_reason,
                usage: hit.usage,
                cached: true,
            });
        }

        let start = Instant::now();
        let mut retries = 0u32;
        let result = loop {
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            match self.backend.send(req) {
                Ok(reply) => break Ok(reply),
                Err(f) if f.is_transient() && retries < self.retry.retry_max => {
                    retries += 1;
                    warn!(tag = %req.request_tag, retry = retries, "transient backend failure: {f}");
                    std::thread::sleep(self.retry.delay(retries));
                }
                Err(f) => break Err(f),
            }
        };

        match result {
            Ok(reply) => {
                // Mock replies report zero latency so logs stay byte-identical.
                let latency = if reply.latency_ms == 0 { 0 } else { start.elapsed().as_millis() as u64 };
                let resp = ChatResponse::new(reply.content, reply.finish_reason, reply.usage);
                log.push(entry(
                    content_hash(&resp.content),
                    latency,
                    retries,
                    false,
                    outcome_label(resp.finish_reason),
                ));
                if let (Some(cache), false) = (&self.cache, resp.finish_reason == FinishReason::Error) {
                    cache.put(
                        &key,
                        &CachedResponse {
                            content: resp.content.clone(),
                            finish_reason: resp.finish_reason,
                            usage: resp.usage,
                        },
                    )?;
                }
                Ok(resp)
            }
            Err(f) => {
                let err = if f.is_transient() {
                    GatewayError::Transport {
                        attempts: retries + 1,
                        last: f.to_string(),
                    }
                } else {
                    match f {
                        BackendFailure::Status { code, body } => GatewayError::BadStatus { code, body },
                        BackendFailure::Transport(last) => GatewayError::Transport {
                            attempts: retries + 1,
                            last,
                        },
                    }
                };
                log.push(entry(String::new(), 0, retries, false, format!("error: {err}")));
                Err(err)
            }
        }
    }
}

fn outcome_label(f: FinishReason) -> String {
    match f {
        FinishReason::Stop => "ok",
        FinishReason::Length => "length",
        FinishReason::Error => "empty",
    }
    .to_string()
}
