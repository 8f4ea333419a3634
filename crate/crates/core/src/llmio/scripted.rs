use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use super::{Backend, CompletionRequest, LlmError};

/// Splits a script into records. Records are separated by lines holding
/// only `---`; a trailing empty record is dropped.
pub fn parse_script(text: &str) -> Vec<String> {
    let mut records = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim_end() == "---" {
            records.push(current.join("\n"));
            current.clear();
        } else {
            current.push(line);
        }
    }
    let last = current.join("\n");
    if !last.trim().is_empty() {
        records.push(last);
    }
    records
}

enum Source {
    Sequential { records: Vec<String>, next: Mutex<usize> },
    Keyed(HashMap<String, Result<String, LlmError>>),
}

/// Plays back canned responses, either in call order or by correlation id.
pub struct ScriptedBackend {
    source: Source,
}

impl ScriptedBackend {
    pub fn new(records: Vec<String>) -> Self {
        Self { source: Source::Sequential { records, next: Mutex::new(0) } }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("cannot read script {}: {e}", path.display())))?;
        Ok(Self::new(parse_script(&text)))
    }

    /// Answers each request with the outcome recorded for its correlation id.
    pub fn keyed(outcomes: HashMap<String, Result<String, LlmError>>) -> Self {
        Self { source: Source::Keyed(outcomes) }
    }

    /// Responses handed out so far (sequential mode).
    pub fn consumed(&self) -> usize {
        match &self.source {
            Source::Sequential { next, .. } => *next.lock().expect("script lock"),
            Source::Keyed(_) => 0,
        }
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        match &self.source {
            Source::Sequential { records, next } => {
                let mut next = next.lock().expect("script lock");
                let record = records.get(*next).cloned().ok_or(LlmError::ScriptExhausted(records.len()))?;
                *next += 1;
                Ok(record)
            }
            Source::Keyed(map) => map.get(&req.correlation_id).cloned().unwrap_or(Err(LlmError::ScriptExhausted(map.len()))),
        }
    }

    fn max_inflight(&self) -> usize {
        match self.source {
            Source::Sequential { .. } => 1,
            Source::Keyed(_) => usize::MAX,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: &str) -> CompletionRequest {
        CompletionRequest::user("p", 1.0, 16, id)
    }

    #[test]
    fn records_in_order_then_exhausted() {
        let b = ScriptedBackend::new(parse_script("first\n---\nsecond\n"));
        assert_eq!(b.complete(&req("a")).unwrap(), "first");
        assert_eq!(b.complete(&req("b")).unwrap(), "second");
        assert_eq!(b.complete(&req("c")), Err(LlmError::ScriptExhausted(2)));
        assert_eq!(b.consumed(), 2);
    }

    #[test]
    fn script_parsing() {
        assert_eq!(parse_script("a\nb\n---\nc\n---\n"), vec!["a\nb", "c"]);
        assert_eq!(parse_script("---\nx"), vec!["", "x"]);
        assert_eq!(parse_script(""), Vec::<String>::new());
        assert_eq!(parse_script("only"), vec!["only"]);
    }

    #[test]
    fn keyed_playback() {
        let map = HashMap::from([
            ("a".to_string(), Ok("A".to_string())),
            ("b".to_string(), Err(LlmError::RateLimited("x".into()))),
        ]);
        let b = ScriptedBackend::keyed(map);
        assert_eq!(b.complete(&req("b")), Err(LlmError::RateLimited("x".into())));
        assert_eq!(b.complete(&req("a")).unwrap(), "A");
        assert!(matches!(b.complete(&req("z")), Err(LlmError::ScriptExhausted(_))));
    }

    #[test]
    fn missing_script_is_config_error() {
        assert!(matches!(ScriptedBackend::from_file("/no/such/script.txt"), Err(LlmError::Config(_))));
    }
}
