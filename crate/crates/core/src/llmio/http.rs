use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, CompletionRequest, LlmError};

pub const API_KEY_ENV: &str = "EVOFORGE_API_KEY";

fn default_base_url() -> String {
    "https://api.openai.com/v1".into()
}
fn default_model() -> String {
    "gpt-4o-mini".into()
}
fn default_timeout() -> f64 {
    120.0
}
fn default_attempts() -> u32 {
    5
}
fn default_backoff() -> f64 {
    1.0
}
fn default_inflight() -> usize {
    4
}

/// Endpoint and retry settings for a chat-completions server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpSettings {
    #[serde(default = "default_base_url")]
    pub base_url: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// First backoff ceiling in seconds; doubles on every retry.
    #[serde(default = "default_backoff")]
    pub backoff_base_secs: f64,
    #[serde(default = "default_inflight")]
    pub max_inflight: usize,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self {
            base_url: default_base_url(),
            model: default_model(),
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_base_secs: default_backoff(),
            max_inflight: default_inflight(),
        }
    }
}

/// Counting semaphore capping requests in flight.
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpBackend {
    settings: HttpSettings,
    api_key: String,
    agent: ureq::Agent,
    slots: Slots,
}

impl HttpBackend {
    /// Reads the API key from `EVOFORGE_API_KEY`.
    pub fn from_env(settings: HttpSettings) -> Result<Self, LlmError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| LlmError::Config(format!("{API_KEY_ENV} is not set")))?;
        Self::with_api_key(settings, key)
    }

    pub fn with_api_key(settings: HttpSettings, api_key: impl Into<String>) -> Result<Self, LlmError> {
        if settings.max_attempts == 0 {
            return Err(LlmError::Config("max_attempts must be at least 1".into()));
        }
        if !(settings.timeout_secs.is_finite() && settings.timeout_secs > 0.0) {
            return Err(LlmError::Config("timeout_secs must be positive".into()));
        }
        if !(settings.backoff_base_secs.is_finite() && settings.backoff_base_secs >= 0.0) {
            return Err(LlmError::Config("backoff_base_secs must be >= 0".into()));
        }
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(settings.timeout_secs)).build();
        let slots = Slots { free: Mutex::new(settings.max_inflight.max(1)), cv: Condvar::new() };
        Ok(Self { settings, api_key: api_key.into(), agent, slots })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.settings.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let body = json!({
            "model": self.settings.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let response = self
            .agent
            .post(&self.endpoint())
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        match response {
            Ok(resp) => {
                let value: serde_json::Value = resp
                    .into_json()
                    .map_err(|e| LlmError::Transport { message: format!("bad response body: {e}"), retriable: false })?;
                value["choices"][0]["message"]["content"]
                    .as_str()
                    .map(str::to_string)
                    .ok_or_else(|| LlmError::Transport {
                        message: "response has no choices[0].message.content".into(),
                        retriable: false,
                    })
            }
            Err(ureq::Error::Status(429, _)) => Err(LlmError::RateLimited("HTTP 429".into())),
            Err(ureq::Error::Status(code, _)) => {
                Err(LlmError::Transport { message: format!("HTTP {code}"), retriable: code >= 500 })
            }
            Err(ureq::Error::Transport(t)) => {
                let message = t.to_string();
                if message.contains("timed out") || message.contains("Timeout") {
                    Err(LlmError::Timeout(message))
                } else {
                    Err(LlmError::Transport { message, retriable: true })
                }
            }
        }
    }
}

impl Backend for HttpBackend {
    /// Retries retriable failures with full-jitter exponential backoff; the
    /// last error is returned once attempts run out.
    fn complete(&self, req: &CompletionRequest) -> Result<String, LlmError> {
        let _slot = self.slots.acquire();
        let mut attempt = 1;
        loop {
            match self.attempt(req) {
                Ok(text) => return Ok(text),
                Err(e) if !e.is_retriable() || attempt >= self.settings.max_attempts => return Err(e),
                Err(_) => {
                    let ceiling = self.settings.backoff_base_secs * 2f64.powi(attempt as i32 - 1);
                    let wait = rand::thread_rng().gen_range(0.0..=ceiling);
                    thread::sleep(Duration::from_secs_f64(wait));
                    attempt += 1;
                }
            }
        }
    }

    fn max_inflight(&self) -> usize {
        self.settings.max_inflight.max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_defaults_fill_in() {
        let s: HttpSettings = serde_json::from_str(r#"{"model": "m"}"#).unwrap();
        assert_eq!(s.model, "m");
        assert_eq!(s.max_attempts, 5);
        assert_eq!(s.backoff_base_secs, 1.0);
    }

    #[test]
    fn bad_settings_rejected() {
        let s = HttpSettings { max_attempts: 0, ..HttpSettings::default() };
        assert!(matches!(HttpBackend::with_api_key(s, "k"), Err(LlmError::Config(_))));
    }

    #[test]
    fn endpoint_joins_cleanly() {
        let s = HttpSettings { base_url: "http://x/v1/".into(), ..HttpSettings::default() };
        assert_eq!(HttpBackend::with_api_key(s, "k").unwrap().endpoint(), "http://x/v1/chat/completions");
    }
}
