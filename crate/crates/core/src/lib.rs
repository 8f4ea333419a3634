pub mod candidate;
pub mod cli;
pub mod config;
pub mod digest;
pub mod engine;
pub mod fitness;
pub mod hdsl;
pub mod llmio;
pub mod problems;
pub mod prompting;
pub mod runlog;
