#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patentsmith_core::domain::Draft;
use patentsmith_core::gateway::MockPlaybook;
use patentsmith_core::mockkit::sample_draft;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patentsmith"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> PathBuf {
    fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_path_buf()
}

/// The sample draft with `marker` appended to the first answer.
pub fn tagged_draft(marker: &str, source: &str) -> Draft {
    let d = sample_draft();
    let mut answers: Vec<String> = d.qa().iter().map(|q| q.answer_text.clone()).collect();
    answers[0] = format!("{} {marker}", answers[0]);
    let answers: [String; 5] = answers.try_into().unwrap();
    Draft::from_answers(answers, Some(source.into())).unwrap()
}

/// `run.toml` with a mock backend reading `playbook.json` next to it.
pub fn mock_config(dir: &Path, pb: &MockPlaybook, pipeline: &str) -> PathBuf {
    write_json(&dir.join("playbook.json"), pb);
    let cfg = format!(
        "schema_version = 1\n\n[backend]\nkind = \"mock\"\nmodel_id = \"mock-model\"\nmock_playbook = \"playbook.json\"\n\n[pipeline]\n{pipeline}\n"
    );
    let p = dir.join("run.toml");
    fs::write(&p, cfg).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
