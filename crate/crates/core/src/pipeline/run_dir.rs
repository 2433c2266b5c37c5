//! Run directory layout:
//!
//! ```text
//! config.json          pipeline config and agent bindings
//! draft.json           the input draft
//! components.json      Step I outputs
//! pgtree.json          guideline tree (when planning finished)
//! subsections/I_J.json one history file per finished subsection
//! calls.jsonl          one line per model call
//! patent.txt           plain-text serialization
//! patent.json          structured serialization
//! warnings.txt         one warning per line
//! status.json          complete or partial, with the abort reason
//! ```

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Pipeline, PipelineError, RunFailure, RunOutcome, Stage};
use crate::domain::{CallLogEntry, DocStatus, Draft, PatentDoc, PgTree, SubsectionDraft};

pub const RUN_DIR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStatus {
    pub schema_version: u32,
    pub status: DocStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub calls: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io(format!("{}: {e}", path.display()))
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, PipelineError> {
        let root = root.into();
        fs::create_dir_all(root.join("subsections")).map_err(|e| io_err(&root, e))?;
        Ok(Self { root })
    }

    pub fn open(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> Result<(), PipelineError> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| io_err(&p, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&self.path(name), e))?;
        self.write(name, &(text + "\n"))
    }

    pub fn write_inputs(&self, config: &serde_json::Value, draft: &Draft) -> Result<(), PipelineError> {
        self.write_json("config.json", config)?;
        self.write_json("draft.json", draft)
    }

    pub fn write_calls(&self, calls: &[CallLogEntry]) -> Result<(), PipelineError> {
        let p = self.path("calls.jsonl");
        let mut f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
        for c in calls {
            let line = serde_json::to_string(c).map_err(|e| io_err(&p, e))?;
            writeln!(f, "{line}").map_err(|e| io_err(&p, e))?;
        }
        Ok(())
    }

    fn write_progress(
        &self,
        components: &impl Serialize,
        tree: Option<&PgTree>,
        subsections: &[SubsectionDraft],
        warnings: &[String],
    ) -> Result<(), PipelineError> {
        self.write_json("components.json", components)?;
        if let Some(t) = tree {
            self.write_json("pgtree.json", t)?;
        }
        for s in subsections {
            self.write_json(
                &format!("subsections/{}_{}.json", s.node.section, s.node.subsection),
                s,
            )?;
        }
        let mut w = warnings.join("\n");
        if !w.is_empty() {
            w.push('\n');
        }
        self.write("warnings.txt", &w)
    }

    pub fn write_patent(&self, patent: &PatentDoc) -> Result<(), PipelineError> {
        self.write("patent.txt", &patent.to_text())?;
        self.write("patent.json", &(patent.to_json() + "\n"))
    }

    pub fn write_outcome(&self, outcome: &RunOutcome) -> Result<(), PipelineError> {
        self.write_progress(
            &outcome.components,
            Some(&outcome.tree),
            &outcome.subsections,
            &outcome.warnings,
        )?;
        self.write_calls(&outcome.patent.generation_meta.calls)?;
        self.write_patent(&outcome.patent)?;
        self.write_json(
            "status.json",
            &RunStatus {
                schema_version: RUN_DIR_SCHEMA_VERSION,
                status: DocStatus::Complete,
                stage: None,
                error: None,
                calls: outcome.patent.generation_meta.calls.len(),
                warnings: outcome.warnings.len(),
            },
        )
    }

    pub fn write_failure(&self, failure: &RunFailure, patent: &PatentDoc) -> Result<(), PipelineError> {
        let p = &failure.partial;
        self.write_progress(&p.components, p.tree.as_ref(), &p.subsections, &p.warnings)?;
        self.write_calls(&p.calls)?;
        self.write_patent(patent)?;
        self.write_json(
            "status.json",
            &RunStatus {
                schema_version: RUN_DIR_SCHEMA_VERSION,
                status: DocStatus::Partial,
                stage: Some(p.stage),
                error: Some(failure.error.to_string()),
                calls: p.calls.len(),
                warnings: p.warnings.len(),
            },
        )
    }

    pub fn status(&self) -> Option<RunStatus> {
        let text = fs::read_to_string(self.path("status.json")).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn read_patent(&self) -> Result<PatentDoc, PipelineError> {
        let p = self.path("patent.json");
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        PatentDoc::from_json(&text).map_err(|e| io_err(&p, e))
    }
}

impl Pipeline {
    /// Snapshot of everything that determines a run's behaviour.
    pub fn config_snapshot(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": RUN_DIR_SCHEMA_VERSION,
            "pipeline": self.config(),
            "agents": self.agents().bindings().collect::<Vec<_>>(),
        })
    }

    /// Runs and persists the result under `dir`. Aborted runs still write
    /// every finished artifact and a partial patent.
    pub fn run_in_dir(&self, draft: &Draft, dir: &Path) -> Result<Result<RunOutcome, RunFailure>, PipelineError> {
        let rd = RunDir::create(dir)?;
        rd.write_inputs(&self.config_snapshot(), draft)?;
        let result = self.run(draft);
        match &result {
            Ok(outcome) => rd.write_outcome(outcome)?,
            Err(failure) => rd.write_failure(failure, &self.partial_patent(&failure.partial))?,
        }
        Ok(result)
    }
}
