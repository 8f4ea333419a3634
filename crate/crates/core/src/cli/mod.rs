//! Command-line entry points. Each command returns a process exit code:
//! 0 success, 1 bad input or configuration, 2 runtime failure or malformed
//! log, 3 replay divergence.

mod bench;
pub mod configfile;
mod replay;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use bench::{bench_csv, eval_expr_line, gen_instances, BenchSuite, GenParams, InstanceKind};
pub use configfile::{ConfigFile, ConfigFileError};
pub use replay::{replay_log, ReplayOutcome};

use crate::engine::{run, Backends, EngineError, RunOutcome};
use crate::llmio::{BackendSpec, HttpSettings, ScriptedBackend};
use crate::runlog::RunLog;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "evoforge", version, about = "Evolutionary search with language-model variation operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Http,
    Scripted,
    Synthetic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a search described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Backend for both roles (overrides the config).
        #[arg(long, value_enum)]
        backend: Option<BackendChoice>,
        /// Response script for the scripted backend.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Re-run a logged run from its recorded responses and check it matches.
    Replay { log: PathBuf },
    /// Score heuristics and baselines on a suite of bin-packing instances.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
    /// Pack one bin-packing instance with an expression and print the score.
    EvalExpr {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        instance: PathBuf,
    },
    /// Write seeded random instances.
    GenInstances {
        #[arg(long, value_enum)]
        kind: InstanceKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Cities (tsp) or items (bpp); defaults to 9 and 50.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        capacity: f64,
        #[arg(long, default_value_t = 10.0)]
        min_item: f64,
        #[arg(long, default_value_t = 40.0)]
        max_item: f64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, out, seed, backend, script } => {
            cmd_run(&config, &RunOverrides { out, seed, backend, script })
        }
        Command::Replay { log } => cmd_replay(&log),
        Command::Bench { suite, out } => bench::cmd_bench(&suite, &out),
        Command::EvalExpr { expr, instance } => bench::cmd_eval_expr(&expr, &instance),
        Command::GenInstances { kind, seed, count, out, size, capacity, min_item, max_item } => {
            let params = GenParams { size, capacity, item_range: (min_item, max_item) };
            bench::cmd_gen_instances(kind, seed, count, &out, &params)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub backend: Option<BackendChoice>,
    pub script: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => EXIT_INPUT,
            RunError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn apply_overrides(file: &mut ConfigFile, o: &RunOverrides) -> Result<(), RunError> {
    if let Some(seed) = o.seed {
        file.run.seed = seed;
    }
    if o.script.is_some() && !matches!(o.backend, Some(BackendChoice::Scripted) | None) {
        return Err(RunError::Input("--script only applies to the scripted backend".into()));
    }
    let spec = match (o.backend, &o.script) {
        (None, None) => return Ok(()),
        (None, Some(script)) | (Some(BackendChoice::Scripted), Some(script)) => {
            BackendSpec::Scripted { script: script.clone() }
        }
        (Some(BackendChoice::Scripted), None) => {
            return Err(RunError::Input("--backend scripted needs --script".into()))
        }
        (Some(BackendChoice::Synthetic), _) => BackendSpec::Synthetic { seed: None },
        (Some(BackendChoice::Http), _) => {
            let settings = match &file.run.backends.variation {
                BackendSpec::Http(s) => s.clone(),
                _ => HttpSettings::default(),
            };
            BackendSpec::Http(settings)
        }
    };
    file.run.backends.variation = spec.clone();
    file.run.backends.reflective = spec;
    Ok(())
}

/// What `evoforge run` produced.
pub struct RunArtifacts {
    pub outcome: RunOutcome,
    pub out_dir: PathBuf,
}

/// Loads the config, runs the engine, and writes `run.jsonl` and
/// `result.json` into the output directory.
pub fn execute_run(config_path: &Path, overrides: &RunOverrides) -> Result<RunArtifacts, RunError> {
    let mut file = ConfigFile::load(config_path).map_err(|e| RunError::Input(e.to_string()))?;
    apply_overrides(&mut file, overrides)?;
    file.run.validate().map_err(|e| RunError::Input(e.to_string()))?;
    let problem = file.load_problem().map_err(RunError::Input)?;
    let backends = Backends::from_config(&file.run).map_err(|e| RunError::Input(e.to_string()))?;
    let out_dir = overrides.out.clone().or(file.output_dir.clone()).unwrap_or_else(|| PathBuf::from("evoforge-out"));
    fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let log = RunLog::to_file(out_dir.join("run.jsonl"))
        .map_err(|e| RunError::Runtime(format!("cannot create run log: {e}")))?;
    let outcome = run(&file.run, &problem, &backends, log).map_err(|e| match e {
        EngineError::Config(c) => RunError::Input(c.to_string()),
        other => RunError::Runtime(other.to_string()),
    })?;
    let best = &outcome.best;
    let result = json!({
        "best_cost": best.cost(),
        "best_candidate": {
            "id": best.id(),
            "kind": best.kind().as_str(),
            "payload": best.payload().render(),
            "description": best.description(),
            "knowledge_tags": best.knowledge_tags(),
            "generation_created": best.provenance().generation_created,
        },
        "generations_run": outcome.generations_run,
        "backend_calls": outcome.backend_calls,
        "evaluations": outcome.evaluations,
    });
    let text = serde_json::to_string_pretty(&result).expect("result serialises") + "\n";
    fs::write(out_dir.join("result.json"), text)
        .map_err(|e| RunError::Runtime(format!("cannot write result.json: {e}")))?;
    Ok(RunArtifacts { outcome, out_dir })
}

fn cmd_run(config: &Path, overrides: &RunOverrides) -> i32 {
    match execute_run(config, overrides) {
        Ok(a) => {
            println!("best cost: {}", a.outcome.best.cost());
            println!("best candidate: {}", a.outcome.best.payload().render());
            println!("output: {}", a.out_dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_replay(log: &Path) -> i32 {
    match replay_log(log) {
        ReplayOutcome::Match { generations } => {
            println!("replay matches: {generations} generation(s)");
            EXIT_OK
        }
        ReplayOutcome::Diverged { generation, detail } => {
            eprintln!("replay diverged at generation {generation}: {detail}");
            EXIT_DIVERGED
        }
        ReplayOutcome::Malformed(message) => {
            eprintln!("error: {message}");
            EXIT_RUNTIME
        }
    }
}

/// Backend that answers from a script file; handy for tests of the command
/// layer.
pub fn scripted_backends(path: &Path) -> Result<Backends, String> {
    ScriptedBackend::from_file(path).map(|b| Backends::shared(Arc::new(b))).map_err(|e| e.to_string())
}
