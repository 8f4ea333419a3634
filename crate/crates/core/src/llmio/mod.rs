//! Completion backends.
//!
//! Every backend implements [`Backend`]: a live chat-completions client
//! ([`HttpBackend`]), playback of recorded responses ([`ScriptedBackend`]) and
//! a deterministic pseudo-model that edits the best example it is shown
//! ([`SyntheticBackend`]).

mod http;
mod scripted;
mod synthetic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use http::{HttpBackend, HttpSettings, API_KEY_ENV};
pub use scripted::{parse_script, ScriptedBackend};
pub use synthetic::SyntheticBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageRole {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: MessageRole,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub correlation_id: String,
}

impl CompletionRequest {
    /// A single user message.
    pub fn user(prompt: impl Into<String>, temperature: f64, max_tokens: u32, correlation_id: impl Into<String>) -> Self {
        Self {
            messages: vec![Message { role: MessageRole::User, content: prompt.into() }],
            temperature,
            max_tokens,
            correlation_id: correlation_id.into(),
        }
    }

    /// Concatenated user messages.
    pub fn prompt(&self) -> String {
        self.messages
            .iter()
            .filter(|m| m.role == MessageRole::User)
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("transport error: {message}")]
    Transport { message: String, retriable: bool },
    #[error("script exhausted after {0} response(s)")]
    ScriptExhausted(usize),
    #[error("prompt has no examples section")]
    UnparseablePrompt,
    #[error("backend configuration: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_retriable(&self) -> bool {
        match self {
            LlmError::Timeout(_) | LlmError::RateLimited(_) => true,
            LlmError::Transport { retriable, .. } => *retriable,
            _ => false,
        }
    }

    /// Stable name used in run logs.
    pub fn kind(&self) -> &'static str {
        match self {
            LlmError::Timeout(_) => "timeout",
            LlmError::RateLimited(_) => "rate_limited",
            LlmError::Transport { .. } => "transport",
            LlmError::ScriptExhausted(_) => "script_exhausted",
            LlmError::UnparseablePrompt => "unparseable_prompt",
            LlmError::Config(_) => "config",
        }
    }

    /// The variant's payload as text; with `kind` and `is_retriable` it
    /// rebuilds the error exactly through [`LlmError::from_logged`].
    pub fn detail(&self) -> String {
        match self {
            LlmError::Timeout(m) | LlmError::RateLimited(m) | LlmError::Config(m) => m.clone(),
            LlmError::Transport { message, .. } => message.clone(),
            LlmError::ScriptExhausted(n) => n.to_string(),
            LlmError::UnparseablePrompt => String::new(),
        }
    }

    pub fn from_logged(kind: &str, detail: &str, retriable: bool) -> LlmError {
        match kind {
            "timeout" => LlmError::Timeout(detail.into()),
            "rate_limited" => LlmError::RateLimited(detail.into()),
            "script_exhausted" => LlmError::ScriptExhausted(detail.parse().unwrap_or(0)),
            "unparseable_prompt" => LlmError::UnparseablePrompt,
            "config" => LlmError::Config(detail.into()),
            _ => LlmError::Transport { message: detail.into(), retriable },
        }
    }
}

/// A completion backend. Implementations must tolerate concurrent calls.
pub trait Backend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError>;

    /// How many requests the engine may have in flight at once. Backends
    /// whose answers depend on call order report 1.
    fn max_inflight(&self) -> usize {
        1
    }
}

/// Which backend serves a role, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    Http(HttpSettings),
    Scripted { script: PathBuf },
    /// `seed` defaults to the run seed.
    Synthetic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Synthetic { seed: None }
    }
}

impl BackendSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BackendSpec::Http(_) => "http",
            BackendSpec::Scripted { .. } => "scripted",
            BackendSpec::Synthetic { .. } => "synthetic",
        }
    }

    pub fn build(&self, run_seed: u64) -> Result<Box<dyn Backend>, LlmError> {
        Ok(match self {
            BackendSpec::Http(settings) => Box::new(HttpBackend::from_env(settings.clone())?),
            BackendSpec::Scripted { script } => Box::new(ScriptedBackend::from_file(script)?),
            BackendSpec::Synthetic { seed } => Box::new(SyntheticBackend::new(seed.unwrap_or(run_seed))),
        })
    }
}
