// Kept in its own test binary: it mutates the process environment.

use evoforge::llmio::{BackendSpec, HttpSettings, LlmError, API_KEY_ENV};

#[test]
fn http_backend_needs_api_key() {
    std::env::remove_var(API_KEY_ENV);
    let spec = BackendSpec::Http(HttpSettings::default());
    match spec.build(1) {
        Err(LlmError::Config(msg)) => assert!(msg.contains(API_KEY_ENV)),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("built without a key"),
    }
    std::env::set_var(API_KEY_ENV, "   ");
    assert!(spec.build(1).is_err());
    std::env::set_var(API_KEY_ENV, "sk-present");
    assert!(spec.build(1).is_ok());
}
