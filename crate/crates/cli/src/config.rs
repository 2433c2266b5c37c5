//! Versioned TOML run configuration.
//!
//! ```toml
//! schema_version = 1
//!
//! [backend]
//! kind = "http"
//! endpoint = "https://api.example.com/v1/chat/completions"
//! api_key_env = "PATENTSMITH_API_KEY"
//! model_id = "gpt-4o"
//!
//! [backends.small]          # optional extra backends, referenced by name
//! kind = "http"
//! endpoint = "http://localhost:8000/v1/chat/completions"
//! model_id = "qwen2.5-7b-instruct"
//!
//! [pipeline]
//! max_refine_rounds = 3
//! pgtree_expansion = "per_section_call"
//!
//! [agents.description]
//! backend = "small"
//! max_tokens = 8192
//!
//! [dataset]
//! accept_value = "ACCEPTED"
//!
//! [metrics]
//! thresholds = [0.2, 0.4]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use patentsmith_core::agents::{AgentConfig, AgentRole, Agents};
use patentsmith_core::datakit::BuildConfig;
use patentsmith_core::gateway::{BackendConfig, BackendKind, MockBackend, MockPlaybook};
use patentsmith_core::pipeline::PipelineConfig;
use patentsmith_metrics::{BpeVocab, MetricSettings, TokenCounter, DEFAULT_EPSILON};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BACKEND: &str = "default";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub cap: Option<f64>,
    /// Vocabulary file for subword counts; whitespace tokens otherwise.
    #[serde(default)]
    pub bpe_vocab: Option<PathBuf>,
}

fn thresholds() -> Vec<f64> {
    vec![0.2, 0.4]
}
fn epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            thresholds: thresholds(),
            epsilon: epsilon(),
            cap: None,
            bpe_vocab: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub backend: BackendConfig,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendConfig>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub agents: BTreeMap<String, AgentConfig>,
    #[serde(default)]
    pub dataset: BuildConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

fn schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

/// Command-line flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub backend: Option<BackendKind>,
    pub mock_playbook: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub cap: Option<f64>,
}

/// A parsed config together with the directory its relative paths resolve
/// against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let loaded = Self { config, base_dir };
        loaded.validate()?;
        Ok(loaded)
    }

    /// No file: a mock backend, which then needs `--mock-playbook`.
    pub fn mock_only() -> Self {
        Self {
            config: RunConfig {
                schema_version: CONFIG_SCHEMA_VERSION,
                backend: BackendConfig::mock("mock"),
                backends: BTreeMap::new(),
                pipeline: PipelineConfig::default(),
                agents: BTreeMap::new(),
                dataset: BuildConfig::default(),
                metrics: MetricsConfig::default(),
            },
            base_dir: PathBuf::new(),
        }
    }

    pub fn load_or_mock(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::mock_only()),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        if c.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Invalid(format!(
                "config schema_version {} unsupported (expected {CONFIG_SCHEMA_VERSION})",
                c.schema_version
            )));
        }
        if c.backends.contains_key(DEFAULT_BACKEND) {
            return Err(CliError::Invalid(format!(
                "[backends.{DEFAULT_BACKEND}] is reserved for [backend]"
            )));
        }
        for (name, a) in &c.agents {
            name.parse::<AgentRole>().map_err(CliError::Invalid)?;
            if let Some(b) = &a.backend {
                if b != DEFAULT_BACKEND && !c.backends.contains_key(b) {
                    return Err(CliError::Invalid(format!("agents.{name}: unknown backend {b:?}")));
                }
            }
        }
        c.pipeline.validate().map_err(|e| CliError::Invalid(e.to_string()))
    }

    pub fn apply(&mut self, ov: &Overrides) {
        let c = &mut self.config;
        if let Some(kind) = ov.backend {
            c.backend.kind = kind;
        }
        if let Some(pb) = &ov.mock_playbook {
            c.backend.kind = BackendKind::Mock;
            c.backend.mock_playbook = Some(std::path::absolute(pb).unwrap_or_else(|_| pb.clone()));
        }
        if c.backend.kind == BackendKind::Mock {
            c.backend.base_delay_ms = 0;
        }
        if let Some(seed) = ov.seed {
            c.pipeline.seed = seed;
            c.dataset.seed = seed;
        }
        if let Some(jobs) = ov.jobs {
            c.dataset.jobs = jobs;
        }
        if let Some(t) = &ov.thresholds {
            c.metrics.thresholds = t.clone();
        }
        if let Some(e) = ov.epsilon {
            c.metrics.epsilon = e;
        }
        if ov.cap.is_some() {
            c.metrics.cap = ov.cap;
        }
    }

    /// Agents with every configured backend attached and per-role
    /// overrides applied. The mock backend of `[backend]` is returned so
    /// callers can count calls.
    pub fn agents(&self) -> Result<(Agents, Option<Arc<MockBackend>>), CliError> {
        self.agents_with(None)
    }

    pub fn agents_with(&self, playbook: Option<MockPlaybook>) -> Result<(Agents, Option<Arc<MockBackend>>), CliError> {
        let c = &self.config;
        let (gw, mock) = c
            .backend
            .build(&self.base_dir, playbook)
            .map_err(|e| CliError::Invalid(format!("[backend]: {e}")))?;
        let mut agents = Agents::new(gw, &c.backend.model_id);
        for (name, b) in &c.backends {
            let (gw, _) = b
                .build(&self.base_dir, None)
                .map_err(|e| CliError::Invalid(format!("[backends.{name}]: {e}")))?;
            agents = agents.with_gateway(name.clone(), gw);
        }
        for (name, a) in &c.agents {
            let role: AgentRole = name.parse().map_err(CliError::Invalid)?;
            let mut a = a.clone();
            if a.model_id.is_none() {
                if let Some(b) = a.backend.as_ref().and_then(|b| c.backends.get(b)) {
                    a.model_id = Some(b.model_id.clone());
                }
            }
            agents = agents
                .configure(role, &a)
                .map_err(|e| CliError::Invalid(format!("agents.{name}: {e}")))?;
        }
        Ok((agents, mock))
    }

    pub fn metric_settings(&self) -> Result<MetricSettings, CliError> {
        let m = &self.config.metrics;
        let counter = match &m.bpe_vocab {
            Some(p) => {
                let path = if p.is_absolute() { p.clone() } else { self.base_dir.join(p) };
                TokenCounter::Bpe(Arc::new(
                    BpeVocab::load(&path).map_err(|e| CliError::Invalid(e.to_string()))?,
                ))
            }
            None => TokenCounter::Whitespace,
        };
        let settings = MetricSettings {
            thresholds: m.thresholds.clone(),
            epsilon: m.epsilon,
            cap: m.cap,
            counter,
        };
        settings.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(settings)
    }

    pub fn model_ids(agents: &Agents) -> Vec<String> {
        let mut ids: Vec<String> = agents.bindings().map(|b| b.model_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }
}
