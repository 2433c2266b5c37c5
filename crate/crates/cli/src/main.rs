use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use patentsmith_cli::{
    cmd_baseline, cmd_bench, cmd_build_dataset, cmd_generate, cmd_score, BenchReport, CliError, Completion,
    LoadedConfig, Overrides,
};
use patentsmith_core::gateway::BackendKind;
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "patentsmith", version, about = "Draft full patent documents from inventor drafts")]
struct Cli {
    /// Run configuration (TOML). Without it a mock backend is assumed.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the backend kind of `[backend]`.
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    /// Mock playbook (JSON); implies the mock backend.
    #[arg(long, global = true)]
    mock_playbook: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel documents / records.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// IRR thresholds, comma separated.
    #[arg(long = "t", global = true, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// IRR denominator smoothing.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Upper bound applied to IRR values.
    #[arg(long, global = true)]
    cap: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Http,
    Mock,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a patent from a draft with the full pipeline.
    Generate {
        #[arg(long)]
        draft: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Single-call zero-shot baseline.
    Baseline {
        #[arg(long)]
        draft: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build draft/patent training pairs from a directory of patent records.
    BuildDataset {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score generated documents against references.
    Score {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate and score every document in a test-set manifest.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip documents whose run directory is already complete.
        #[arg(long)]
        resume: bool,
    },
    /// Print a saved report.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<Completion, CliError> {
    let mut cfg = LoadedConfig::load_or_mock(cli.config.as_deref())?;
    cfg.apply(&Overrides {
        backend: cli.backend.map(|b| match b {
            Backend::Http => BackendKind::Http,
            Backend::Mock => BackendKind::Mock,
        }),
        mock_playbook: cli.mock_playbook,
        seed: cli.seed,
        jobs: cli.jobs,
        thresholds: cli.thresholds,
        epsilon: cli.epsilon,
        cap: cli.cap,
    });
    match cli.command {
        Command::Generate { draft, out } => {
            let c = cmd_generate(&draft, &cfg, &out)?;
            println!("{}: {}", out.display(), status_word(c));
            Ok(c)
        }
        Command::Baseline { draft, out } => {
            let c = cmd_baseline(&draft, &cfg, &out)?;
            println!("{}: {}", out.display(), status_word(c));
            Ok(c)
        }
        Command::BuildDataset { input, out } => {
            let r = cmd_build_dataset(&cfg, &input, &out)?;
            println!(
                "ingested {}, skipped {}, accepted {}, rejected {}; splits {}/{}/{}",
                r.ingested,
                r.ingest_skipped,
                r.accepted,
                r.rejected,
                r.manifest.train.len(),
                r.manifest.valid.len(),
                r.manifest.test.len()
            );
            Ok(Completion::Complete)
        }
        Command::Score {
            generated,
            reference,
            out,
        } => {
            let r = cmd_score(&generated, &reference, &cfg, &out)?;
            print!("{}", r.to_table());
            Ok(Completion::Complete)
        }
        Command::Bench { manifest, out, resume } => {
            let jobs = cli.jobs.unwrap_or(1);
            let o = cmd_bench(&manifest, &cfg, &out, jobs, resume)?;
            print!("{}", o.report.to_table());
            println!("executed {}, skipped {}", o.executed.len(), o.skipped.len());
            Ok(if o.all_complete() { Completion::Complete } else { Completion::Partial })
        }
        Command::Report { report, format } => {
            let r = BenchReport::load(&report)?;
            match format {
                Format::Table => print!("{}", r.to_table()),
                Format::Csv => print!("{}", r.to_csv()?),
                Format::Json => println!("{}", serde_json::to_string_pretty(&r).map_err(|e| CliError::Io(e.to_string()))?),
            }
            Ok(Completion::Complete)
        }
    }
}

fn status_word(c: Completion) -> &'static str {
    match c {
        Completion::Complete => "complete",
        Completion::Partial => "partial",
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
