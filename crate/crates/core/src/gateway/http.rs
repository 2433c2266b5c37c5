//! Chat-completions HTTP backend.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::backend::{Backend, BackendFailure, BackendReply};
use super::{ChatRequest, FinishReason, Usage};

pub struct HttpBackend {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            api_key,
            agent,
        }
    }

    pub fn request_body(req: &ChatRequest) -> Value {
        json!({
            "model": req.model_id,
            "messages": req.messages,
            "temperature": req.temperature,
            "top_p": req.top_p,
            "max_tokens": req.max_tokens,
            "stream": false,
        })
    }

    pub fn parse_body(body: &Value) -> Result<(String, FinishReason, Usage), String> {
        let choice = body
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| "response has no choices".to_string())?;
        let content = choice
            .pointer("/message/content")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        let finish_reason = match choice.get("finish_reason").and_then(Value::as_str) {
            Some("length") => FinishReason::Length,
            Some("stop") | None => FinishReason::Stop,
            Some(_) => FinishReason::Error,
        };
        let usage = Usage {
            prompt_tokens: body.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
            completion_tokens: body
                .pointer("/usage/completion_tokens")
                .and_then(Value::as_u64)
                .unwrap_or(0),
        };
        Ok((content, finish_reason, usage))
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn send(&self, req: &ChatRequest) -> Result<BackendReply, BackendFailure> {
        let start = Instant::now();
        let mut call = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call
            .send_json(Self::request_body(req))
            .map_err(|e| BackendFailure::Transport(e.to_string()))?;
        let code = resp.status().as_u16();
        if !(200..300).contains(&code) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendFailure::Status { code, body });
        }
        let body: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendFailure::Transport(format!("reading body: {e}")))?;
        let (content, finish_reason, usage) =
            Self::parse_body(&body).map_err(|body| BackendFailure::Status { code, body })?;
        Ok(BackendReply {
            content,
            finish_reason,
            usage,
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::Message;

    #[test]
    fn body_shape() {
        let req = ChatRequest::new("gpt", "title", vec![Message::user("hi")]);
        let b = HttpBackend::request_body(&req);
        assert_eq!(b["model"], "gpt");
        assert_eq!(b["messages"][0]["role"], "user");
        assert_eq!(b["temperature"], 0.5);
    }

    #[test]
    fn parse_choices() {
        let body = json!({
            "choices": [{"message": {"role": "assistant", "content": "x"}, "finish_reason": "length"}],
            "usage": {"prompt_tokens": 3, "completion_tokens": 1}
        });
        let (c, f, u) = HttpBackend::parse_body(&body).unwrap();
        assert_eq!(c, "x");
        assert_eq!(f, FinishReason::Length);
        assert_eq!(u.prompt_tokens, 3);
        assert!(HttpBackend::parse_body(&json!({})).is_err());
    }

    #[test]
    fn unreachable_endpoint_is_transport() {
        let b = HttpBackend::new("http://127.0.0.1:9/v1/chat/completions", None, Duration::from_secs(2));
        let req = ChatRequest::new("m", "t", vec![Message::user("hi")]);
        assert!(matches!(b.send(&req), Err(BackendFailure::Transport(_))));
    }
}
