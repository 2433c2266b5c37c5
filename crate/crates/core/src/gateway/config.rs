//! Backend configuration, usually a `[backend]` table in a TOML file:
//!
//! ```toml
//! [backend]
//! kind = "http"                      # or "mock"
//! endpoint = "https://api.example.com/v1/chat/completions"
//! api_key_env = "PATENTSMITH_API_KEY" # name of the variable, never the key
//! model_id = "gpt-4o"
//! rpm = 60
//! retry_max = 3
//! timeout_s = 120
//! cache_dir = "cache"                # optional, relative to the config file
//! mock_playbook = "playbook.json"    # kind = "mock" only
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Gateway, GatewayError, HttpBackend, MockBackend, MockPlaybook, ModelLimits, RateLimiter, ResponseCache, RetryPolicy};

pub const BACKEND_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub model_id: String,
    #[serde(default)]
    pub rpm: Option<u32>,
    #[serde(default = "one")]
    pub burst: u32,
    #[serde(default = "retry_max")]
    pub retry_max: u32,
    #[serde(default = "base_delay")]
    pub base_delay_ms: u64,
    #[serde(default = "timeout")]
    pub timeout_s: u64,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub mock_playbook: Option<PathBuf>,
    #[serde(default)]
    pub limits: ModelLimits,
}

fn schema() -> u32 {
    BACKEND_SCHEMA_VERSION
}
fn one() -> u32 {
    1
}
fn retry_max() -> u32 {
    RetryPolicy::default().retry_max
}
fn base_delay() -> u64 {
    RetryPolicy::default().base_delay_ms
}
fn timeout() -> u64 {
    120
}

impl BackendConfig {
    pub fn mock(model_id: impl Into<String>) -> Self {
        Self {
            schema_version: BACKEND_SCHEMA_VERSION,
            kind: BackendKind::Mock,
            endpoint: None,
            api_key_env: None,
            model_id: model_id.into(),
            rpm: None,
            burst: 1,
            retry_max: retry_max(),
            base_delay_ms: 0,
            timeout_s: timeout(),
            cache_dir: None,
            mock_playbook: None,
            limits: ModelLimits::default(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: &str| Err(GatewayError::Config(m.to_string()));
        if self.schema_version != BACKEND_SCHEMA_VERSION {
            return Err(GatewayError::Config(format!(
                "backend schema_version {} unsupported (expected {BACKEND_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty");
        }
        if self.kind == BackendKind::Http && self.endpoint.as_deref().is_none_or(|e| e.trim().is_empty()) {
            return bad("http backend needs an endpoint");
        }
        if self.rpm == Some(0) {
            return bad("rpm must be positive");
        }
        Ok(())
    }

    fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Builds a gateway. Relative paths resolve against `base_dir`. For mock
    /// backends `playbook` overrides the configured playbook file; the mock
    /// handle is returned so callers can inspect call counts.
    pub fn build(
        &self,
        base_dir: &Path,
        playbook: Option<MockPlaybook>,
    ) -> Result<(Gateway, Option<Arc<MockBackend>>), GatewayError> {
        self.validate()?;
        let (gw, mock) = match self.kind {
            BackendKind::Mock => {
                let pb = match (playbook, &self.mock_playbook) {
                    (Some(pb), _) => pb,
                    (None, Some(path)) => MockPlaybook::load(&Self::resolve(base_dir, path))?,
                    (None, None) => return Err(GatewayError::Config("mock backend needs a playbook".into())),
                };
                let mock = Arc::new(MockBackend::new(pb)?);
                (Gateway::new(mock.clone()), Some(mock))
            }
            BackendKind::Http => {
                let api_key = match &self.api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        GatewayError::Config(format!("environment variable {var} is not set"))
                    })?),
                    None => None,
                };
                let endpoint = self.endpoint.clone().unwrap_or_default();
                let http = HttpBackend::new(endpoint, api_key, Duration::from_secs(self.timeout_s));
                (Gateway::new(Arc::new(http)), None)
            }
        };
        let mut gw = gw
            .with_retry(RetryPolicy {
                retry_max: self.retry_max,
                base_delay_ms: self.base_delay_ms,
                max_delay_ms: RetryPolicy::default().max_delay_ms,
            })
            .with_limits(self.limits.clone());
        if let Some(rpm) = self.rpm {
            gw = gw.with_rate_limit(RateLimiter::new(rpm, self.burst));
        }
        if let Some(dir) = &self.cache_dir {
            gw = gw.with_cache(ResponseCache::open(Self::resolve(base_dir, dir))?);
        }
        Ok((gw, mock))
    }
}
