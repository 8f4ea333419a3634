//! The JSON config file read by `evoforge run`.
//!
//! ```json
//! {
//!   "config_version": 1,
//!   "problem": { "instance": "data/unit_square.json" },
//!   "output_dir": "runs/demo_tsp",
//!   "run": { "mode": "solution_search", "population_size": 8, ... }
//! }
//! ```
//!
//! Heuristic search names a training set instead:
//! `"problem": { "training_set": ["a.json", "b.json"], "weights": [1, 2] }`.
//! Relative paths are resolved against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::llmio::BackendSpec;
use crate::problems::io::{load_bpp, load_tsp};
use crate::problems::{Problem, TrainingSet};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_set: Option<Vec<PathBuf>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub config_version: u32,
    pub problem: ProblemSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub run: RunConfig,
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigFileError {
    pub path: PathBuf,
    pub message: String,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn resolve_backend(base: &Path, spec: &mut BackendSpec) {
    if let BackendSpec::Scripted { script } = spec {
        *script = resolve(base, script);
    }
}

impl ConfigFile {
    /// Reads and validates a config file, resolving its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigFileError> {
        let path = path.as_ref();
        let err = |message: String| ConfigFileError { path: path.to_path_buf(), message };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| err(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if file.config_version != CONFIG_VERSION {
            return Err(err(format!(
                "unsupported config_version {} (expected {CONFIG_VERSION})",
                file.config_version
            )));
        }
        file.run.validate().map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = if base.as_os_str().is_empty() { Path::new(".") } else { base };
        let p = &mut file.problem;
        match (&p.instance, &p.training_set) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(err("problem needs exactly one of \"instance\" or \"training_set\"".into())),
        }
        p.instance = p.instance.as_ref().map(|i| resolve(base, i));
        p.training_set = p.training_set.as_ref().map(|v| v.iter().map(|i| resolve(base, i)).collect());
        file.output_dir = file.output_dir.as_ref().map(|o| resolve(base, o));
        resolve_backend(base, &mut file.run.backends.variation);
        resolve_backend(base, &mut file.run.backends.reflective);
        Ok(file)
    }

    /// Loads the instance or training set the config names.
    pub fn load_problem(&self) -> Result<Problem, String> {
        if let Some(path) = &self.problem.instance {
            return load_tsp(path).map(Problem::Tsp).map_err(|e| e.to_string());
        }
        let paths = self.problem.training_set.as_deref().unwrap_or_default();
        let instances = paths.iter().map(load_bpp).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        TrainingSet::new(instances, self.problem.weights.clone()).map(Problem::Bpp).map_err(|e| e.to_string())
    }
}
