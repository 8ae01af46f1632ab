//! Command-line front end.
//!
//! Exit codes: 0 when the command succeeded, 1 when it ran but the outcome
//! was not a success (partial or failed turn, unparseable action), 2 for
//! bad input or environment.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use sheetmind_agents::orchestrator::{Ablation, PipelineConfig, SessionState, SessionStore, Status};
use sheetmind_core::io::{load_workbook, save_workbook, Format};
use sheetmind_core::{parse_action, serialize_action, validate_static, CellValue, SheetDiff, Verdict, Workbook};
use sheetmind_llm::{BackendConfig, BackendRegistry, ChatBackend};

use crate::bench::{parse_configs, run_bench, BackendMode, BenchOptions};
use crate::service::{serve, AppState};
use crate::task::load_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSUCCESSFUL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sheetmind", version, about = "Edit spreadsheets with natural-language instructions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one instruction to a workbook file and print the summary and diff.
    Run {
        /// Workbook as .csv or workbook-json.
        #[arg(long)]
        sheet: PathBuf,
        #[arg(long)]
        instruction: String,
        /// Replay a backend script instead of calling a live model.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        ablation: String,
        /// Where to write the edited workbook; format follows the extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the transcript as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Print the outcome as JSON instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory holding persisted sessions.
        #[arg(long, default_value = "sessions")]
        store: PathBuf,
        /// Default backend script for sessions that bring none.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        ablation: String,
    },
    /// Run a task suite under one or more ablations.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "full,no_reflection,no_manager,action_only")]
        configs: String,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Use the live backend from the environment instead of task scripts.
        #[arg(long)]
        live: bool,
    },
    /// Parse an action and print its canonical form.
    Parse {
        action: String,
        /// Also check the action against this workbook.
        #[arg(long)]
        sheet: Option<PathBuf>,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

/// Like [`run`] but writes normal output to `out`.
pub fn dispatch(command: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Run {
            sheet,
            instruction,
            script,
            ablation,
            out: out_path,
            transcript,
            json,
        } => {
            let ablation = ablation_arg(&ablation)?;
            let workbook = read_workbook(&sheet)?;
            let backend = backend_for(script.as_deref())?;
            let config = PipelineConfig::with_ablation(ablation);
            let mut session = SessionState::new("cli", workbook, config);
            let outcome = session.run_instruction(backend.as_ref(), &instruction);
            if let Some(path) = out_path {
                let text = save_workbook(&session.workbook, Format::from_path(&path))?;
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = transcript {
                std::fs::write(&path, session.transcript.to_jsonl())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&outcome)?)?;
            } else {
                writeln!(out, "{}", outcome.summary)?;
                for e in &outcome.executed_actions {
                    write_diff(out, &e.action, &e.diff)?;
                }
                if let Some(r) = &outcome.failure_reason {
                    writeln!(out, "status: {:?}: {r}", outcome.status)?;
                }
            }
            Ok(if outcome.status == Status::Success { EXIT_OK } else { EXIT_UNSUCCESSFUL })
        }
        Command::Serve {
            addr,
            store,
            script,
            ablation,
        } => {
            let ablation = ablation_arg(&ablation)?;
            let store = SessionStore::open(&store)?;
            let backend = match script {
                Some(p) => Some(backend_for(Some(&p))?),
                None => match live_backend() {
                    Ok(b) => Some(b),
                    Err(e) => {
                        tracing::warn!("no default backend ({e:#}); sessions must bring a script");
                        None
                    }
                },
            };
            let app = Arc::new(AppState::new(store, backend, PipelineConfig::with_ablation(ablation)));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(addr, app))?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            suite,
            configs,
            json,
            parallel,
            live,
        } => {
            let configs = parse_configs(&configs).map_err(|e| anyhow!(e))?;
            let tasks = load_suite(&suite)?;
            let mode = if live { BackendMode::Live(live_backend()?) } else { BackendMode::Scripted };
            let options = BenchOptions {
                parallelism: parallel,
                test_mode: !live,
            };
            let report = run_bench(&tasks, &configs, &mode, options)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(out, "{}", report.table())?;
            }
            Ok(EXIT_OK)
        }
        Command::Parse { action, sheet } => {
            let parsed = match parse_action(&action) {
                Ok(a) => a,
                Err(e) => {
                    writeln!(out, "parse error: {e}")?;
                    return Ok(EXIT_UNSUCCESSFUL);
                }
            };
            writeln!(out, "{}", serialize_action(&parsed))?;
            if let Some(path) = sheet {
                let wb = read_workbook(&path)?;
                match validate_static(&parsed, &wb) {
                    Verdict::Valid => writeln!(out, "valid")?,
                    Verdict::Invalid { code, reason } => {
                        writeln!(out, "invalid ({}): {reason}", code.as_str())?;
                        return Ok(EXIT_UNSUCCESSFUL);
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn write_diff(out: &mut dyn Write, action: &str, d: &SheetDiff) -> std::io::Result<()> {
    writeln!(out, "> {action}")?;
    for s in &d.structural_changes {
        writeln!(out, "  {:?} on {}: {} at {}", s.kind, s.sheet, s.count, s.at)?;
    }
    for c in &d.cell_changes {
        let show = |v: &CellValue| if v.is_empty() { "(empty)".to_string() } else { format!("{:?}", v.render()) };
        writeln!(out, "  {}!{}: {} -> {}", c.sheet, c.addr, show(&c.before), show(&c.after))?;
    }
    Ok(())
}

fn ablation_arg(label: &str) -> anyhow::Result<Ablation> {
    Ablation::from_label(label)
        .ok_or_else(|| anyhow!("unknown ablation {label:?}; expected one of {}", Ablation::LABELS.join(", ")))
}

fn read_workbook(path: &Path) -> anyhow::Result<Workbook> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_workbook(&text, Format::from_path(path)).with_context(|| format!("loading {}", path.display()))
}

fn backend_for(script: Option<&Path>) -> anyhow::Result<Arc<dyn ChatBackend>> {
    match script {
        Some(p) => Ok(BackendRegistry::standard().build(&BackendConfig::scripted(p))?),
        None => live_backend(),
    }
}

fn live_backend() -> anyhow::Result<Arc<dyn ChatBackend>> {
    BackendRegistry::standard()
        .build(&BackendConfig::default().with_env())
        .context("configuring the live backend")
}
