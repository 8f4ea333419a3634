use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use crate::config::RunConfig;
use crate::engine::{run, Backends};
use crate::llmio::{LlmError, ScriptedBackend};
use crate::problems::io::problem_from_json;
use crate::prompting::PROMPT_FORMAT_VERSION;
use crate::runlog::{read_log, RecordKind, RunLog, RunLogRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayOutcome {
    Match { generations: usize },
    Diverged { generation: u32, detail: String },
    Malformed(String),
}

fn recorded_outcomes(records: &[RunLogRecord]) -> Result<HashMap<String, Result<String, LlmError>>, String> {
    let mut map = HashMap::new();
    for r in records.iter().filter(|r| r.kind == RecordKind::Response) {
        let id = r.body["correlation_id"].as_str().ok_or(format!("record {} has no correlation_id", r.seq))?;
        let outcome = if let Some(text) = r.body["text"].as_str() {
            Ok(text.to_string())
        } else {
            let err = &r.body["error"];
            let kind = err["kind"].as_str().ok_or(format!("record {} has neither text nor error", r.seq))?;
            Err(LlmError::from_logged(
                kind,
                err["detail"].as_str().unwrap_or(""),
                err["retriable"].as_bool().unwrap_or(false),
            ))
        };
        map.insert(id.to_string(), outcome);
    }
    Ok(map)
}

/// Re-runs the logged run with its recorded responses and compares every
/// Generation record (population digest and the rest of the body).
pub fn replay_log(path: &Path) -> ReplayOutcome {
    let records = match read_log(path) {
        Ok(r) => r,
        Err(e) => return ReplayOutcome::Malformed(e.to_string()),
    };
    replay_records(&records)
}

pub fn replay_records(records: &[RunLogRecord]) -> ReplayOutcome {
    let malformed = |m: &str| ReplayOutcome::Malformed(m.to_string());
    let Some(meta) = records.first().filter(|r| r.kind == RecordKind::Meta) else {
        return malformed("log does not start with a meta record");
    };
    if records.last().map(|r| r.kind) != Some(RecordKind::Result) {
        return malformed("log has no result record (truncated?)");
    }
    if meta.body["prompt_format_version"].as_u64() != Some(u64::from(PROMPT_FORMAT_VERSION)) {
        return malformed("log was written with a different prompt format version");
    }
    let config: RunConfig = match serde_json::from_value(meta.body["config"].clone()) {
        Ok(c) => c,
        Err(e) => return ReplayOutcome::Malformed(format!("meta config: {e}")),
    };
    let problem = match problem_from_json(&meta.body["problem"]) {
        Ok(p) => p,
        Err(e) => return ReplayOutcome::Malformed(format!("meta problem: {e}")),
    };
    let outcomes = match recorded_outcomes(records) {
        Ok(o) => o,
        Err(e) => return ReplayOutcome::Malformed(e),
    };
    let backends = Backends::shared(Arc::new(ScriptedBackend::keyed(outcomes)));
    let rerun = match run(&config, &problem, &backends, RunLog::new()) {
        Ok(o) => o,
        Err(e) => return ReplayOutcome::Malformed(format!("cannot re-run: {e}")),
    };

    let original: Vec<&RunLogRecord> = records.iter().filter(|r| r.kind == RecordKind::Generation).collect();
    let replayed: Vec<&RunLogRecord> = rerun.log.of_kind(RecordKind::Generation).collect();
    for (i, orig) in original.iter().enumerate() {
        let Some(again) = replayed.get(i) else {
            return ReplayOutcome::Diverged { generation: orig.generation, detail: "replay stopped early".into() };
        };
        let (a, b) = (&orig.body["population_digest"], &again.body["population_digest"]);
        if a != b {
            return ReplayOutcome::Diverged {
                generation: orig.generation,
                detail: format!("population digest {a} != {b}"),
            };
        }
        if orig.body != again.body || orig.generation != again.generation {
            return ReplayOutcome::Diverged { generation: orig.generation, detail: "generation record differs".into() };
        }
    }
    if replayed.len() > original.len() {
        let g = replayed[original.len()].generation;
        return ReplayOutcome::Diverged { generation: g, detail: "replay ran past the original".into() };
    }
    let last = records.last().expect("checked above");
    let again = rerun.log.records().last().expect("run always logs a result");
    if last.body != again.body {
        return ReplayOutcome::Diverged { generation: last.generation, detail: "result record differs".into() };
    }
    ReplayOutcome::Match { generations: original.len() }
}
