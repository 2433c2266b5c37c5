//! Command implementations behind the `patentsmith` binary.
//!
//! Exit codes: 0 complete, 1 invalid input, 2 partial or degraded output.

pub mod baseline;
pub mod bench;
pub mod config;
pub mod report;
pub mod score;

use std::fs;
use std::path::Path;

use patentsmith_core::agents::AgentRole;
use patentsmith_core::datakit::{build_dataset, BuildReport};
use patentsmith_core::domain::{CallLog, DocStatus, Draft, PatentDoc, RunRecord};
use patentsmith_core::pipeline::{Pipeline, PipelineError, RunDir, RunStatus, RUN_DIR_SCHEMA_VERSION};
use serde::Serialize;
use thiserror::Error;

pub use baseline::{parse_zero_shot, ZeroShotParse};
pub use bench::{run_bench, BenchOutcome, TestsetManifest};
pub use config::{LoadedConfig, Overrides, RunConfig};
pub use report::BenchReport;
pub use score::{score_dirs, AlignmentError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error("{0}")]
    Io(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(m) => CliError::Invalid(m),
            other => CliError::Io(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Complete,
    Partial,
}

impl Completion {
    pub fn exit_code(self) -> i32 {
        match self {
            Completion::Complete => 0,
            Completion::Partial => 2,
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub fn read_draft(path: &Path) -> Result<Draft, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Runs the full pipeline on one draft into `out`.
pub fn cmd_generate(draft: &Path, cfg: &LoadedConfig, out: &Path) -> Result<Completion, CliError> {
    let draft = read_draft(draft)?;
    let (agents, _) = cfg.agents()?;
    let pipeline = Pipeline::new(agents, cfg.config.pipeline.clone())?;
    Ok(match pipeline.run_in_dir(&draft, out)? {
        Ok(_) => Completion::Complete,
        Err(_) => Completion::Partial,
    })
}

#[derive(Debug, Serialize)]
struct ParseReport<'a> {
    patent_tag: bool,
    found: &'a [patentsmith_core::domain::SectionName],
    missing: &'a [patentsmith_core::domain::SectionName],
    errors: &'a [String],
}

/// One zero-shot call. Writes `raw_output.txt`, `parse_report.json`, and
/// whatever sections could be extracted; missing sections make the run
/// partial.
pub fn cmd_baseline(draft: &Path, cfg: &LoadedConfig, out: &Path) -> Result<Completion, CliError> {
    let draft = read_draft(draft)?;
    let (agents, _) = cfg.agents()?;
    let rd = RunDir::create(out)?;
    let binding = agents.binding(AgentRole::ZeroShot);
    rd.write_inputs(
        &serde_json::json!({ "schema_version": RUN_DIR_SCHEMA_VERSION, "baseline": "zero_shot", "agent": binding }),
        &draft,
    )?;
    let log = CallLog::new();
    let result = agents.zero_shot(&draft, &log);
    let calls = log.drain();
    rd.write_calls(&calls)?;
    let order = cfg.config.pipeline.section_order.clone();
    let meta = RunRecord {
        model_id: binding.model_id.clone(),
        sampling: binding.sampling,
        calls,
        seed: cfg.config.pipeline.seed,
    };
    let n_calls = meta.calls.len();
    let (status, error) = match result {
        Ok(resp) => {
            rd.write("raw_output.txt", &resp.content)?;
            let parsed = parse_zero_shot(&resp.content);
            rd.write_json(
                "parse_report.json",
                &ParseReport {
                    patent_tag: parsed.patent_tag,
                    found: &parsed.found,
                    missing: &parsed.missing,
                    errors: &parsed.errors,
                },
            )?;
            let doc = PatentDoc::partial(parsed.sections, order, meta);
            rd.write_patent(&doc)?;
            let err = (!parsed.missing.is_empty()).then(|| {
                let names: Vec<_> = parsed.missing.iter().map(|n| n.key()).collect();
                format!("missing sections: {}", names.join(", "))
            });
            (doc.status, err)
        }
        Err(e) => (DocStatus::Partial, Some(e.to_string())),
    };
    rd.write_json(
        "status.json",
        &RunStatus {
            schema_version: RUN_DIR_SCHEMA_VERSION,
            status,
            stage: None,
            error,
            calls: n_calls,
            warnings: 0,
        },
    )?;
    Ok(match status {
        DocStatus::Complete => Completion::Complete,
        DocStatus::Partial => Completion::Partial,
    })
}

pub fn cmd_build_dataset(cfg: &LoadedConfig, input: &Path, out: &Path) -> Result<BuildReport, CliError> {
    let (agents, _) = cfg.agents()?;
    build_dataset(&agents, &cfg.config.dataset, input, out).map_err(|e| match e {
        patentsmith_core::datakit::DatakitError::Io(m) => CliError::Io(m),
        other => CliError::Invalid(other.to_string()),
    })
}

/// Scores and writes `report.{json,csv,txt}` under `out`.
pub fn cmd_score(generated: &Path, reference: &Path, cfg: &LoadedConfig, out: &Path) -> Result<BenchReport, CliError> {
    let report = score_dirs(generated, reference, &cfg.metric_settings()?)?;
    report.write(out)?;
    Ok(report)
}

pub fn cmd_bench(
    manifest: &Path,
    cfg: &LoadedConfig,
    out: &Path,
    jobs: usize,
    resume: bool,
) -> Result<BenchOutcome, CliError> {
    let items = TestsetManifest::load(manifest)?;
    let settings = cfg.metric_settings()?;
    let (agents, _) = cfg.agents()?;
    let models = LoadedConfig::model_ids(&agents);
    let pipeline = Pipeline::new(agents, cfg.config.pipeline.clone())?;
    run_bench(&pipeline, &items, &settings, models, out, jobs, resume)
}
