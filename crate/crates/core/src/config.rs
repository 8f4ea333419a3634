//! Run configuration.

use serde::{Deserialize, Serialize};

use crate::fitness::{AdaptiveSchedule, Aggregator};
use crate::hdsl::DEFAULT_MAX_SIZE;
use crate::llmio::BackendSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SolutionSearch,
    HeuristicSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyFamily {
    Exploration,
    Modification,
}

/// One prompt strategy. `task_instruction` falls back to the family's
/// template and is the part reflection rewrites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub label: String,
    pub family: StrategyFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_instruction: Option<String>,
    #[serde(default = "default_examples")]
    pub examples_per_prompt: usize,
    #[serde(default = "one")]
    pub offspring_requested: usize,
    /// Parents per prompt; defaults to the selection group size for
    /// exploration and to 1 for modification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
}

fn default_examples() -> usize {
    5
}
fn one() -> usize {
    1
}

impl StrategySpec {
    pub fn new(label: impl Into<String>, family: StrategyFamily) -> Self {
        Self {
            label: label.into(),
            family,
            task_instruction: None,
            examples_per_prompt: default_examples(),
            offspring_requested: 1,
            group_size: None,
        }
    }

    pub fn effective_group_size(&self, selection: &SelectionConfig) -> usize {
        self.group_size.unwrap_or(match self.family {
            StrategyFamily::Exploration => selection.group_size,
            StrategyFamily::Modification => 1,
        })
    }
}

pub fn default_strategies() -> Vec<StrategySpec> {
    vec![
        StrategySpec::new("e1", StrategyFamily::Exploration),
        StrategySpec::new("m1", StrategyFamily::Modification),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub tournament_size: usize,
    pub groups_per_generation: usize,
    pub group_size: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { tournament_size: 2, groups_per_generation: 4, group_size: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReflectionConfig {
    pub enabled: bool,
    pub cadence: u32,
}

impl Default for ReflectionConfig {
    fn default() -> Self {
        Self { enabled: false, cadence: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitnessConfig {
    pub aggregator: Aggregator,
    pub schedule: AdaptiveSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendsConfig {
    pub variation: BackendSpec,
    pub reflective: BackendSpec,
    pub variation_temperature: f64,
    pub reflection_temperature: f64,
    pub max_tokens: u32,
}

impl Default for BackendsConfig {
    fn default() -> Self {
        Self {
            variation: BackendSpec::default(),
            reflective: BackendSpec::default(),
            variation_temperature: 1.0,
            reflection_temperature: 0.2,
            max_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_backend_calls: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<u64>,
    /// Stop as soon as the best cost is at or below this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub generations: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategySpec>,
    #[serde(default)]
    pub reflection: ReflectionConfig,
    #[serde(default)]
    pub fitness: FitnessConfig,
    #[serde(default)]
    pub backends: BackendsConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default = "default_max_size")]
    pub max_expr_size: usize,
}

fn default_population() -> usize {
    8
}
fn default_generations() -> u32 {
    100
}
fn default_seed() -> u64 {
    1
}
fn default_max_size() -> usize {
    DEFAULT_MAX_SIZE
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            population_size: default_population(),
            generations: default_generations(),
            seed: default_seed(),
            selection: SelectionConfig::default(),
            strategies: default_strategies(),
            reflection: ReflectionConfig::default(),
            fitness: FitnessConfig::default(),
            backends: BackendsConfig::default(),
            budget: BudgetConfig::default(),
            max_expr_size: default_max_size(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError(msg));
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if self.generations < 1 {
            return bad("generations must be >= 1, got 0".into());
        }
        if self.selection.tournament_size < 1 {
            return bad("selection.tournament_size must be >= 1, got 0".into());
        }
        if self.selection.groups_per_generation < 1 {
            return bad("selection.groups_per_generation must be >= 1, got 0".into());
        }
        if self.selection.group_size < 1 {
            return bad("selection.group_size must be >= 1, got 0".into());
        }
        if self.reflection.cadence < 1 {
            return bad("reflection.cadence must be >= 1, got 0".into());
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if s.label.trim().is_empty() {
                return bad(format!("strategies[{i}].label is empty"));
            }
            if self.strategies[..i].iter().any(|o| o.label == s.label) {
                return bad(format!("duplicate strategy label {:?}", s.label));
            }
            if s.task_instruction.as_deref().is_some_and(|t| t.trim().is_empty()) {
                return bad(format!("strategies[{i}].task_instruction is empty"));
            }
            if s.examples_per_prompt < 1 {
                return bad(format!("strategies[{i}].examples_per_prompt must be >= 1"));
            }
            if s.offspring_requested < 1 {
                return bad(format!("strategies[{i}].offspring_requested must be >= 1"));
            }
            if s.group_size == Some(0) {
                return bad(format!("strategies[{i}].group_size must be >= 1"));
            }
        }
        if self.max_expr_size < 1 {
            return bad("max_expr_size must be >= 1".into());
        }
        for (name, t) in [
            ("variation_temperature", self.backends.variation_temperature),
            ("reflection_temperature", self.backends.reflection_temperature),
        ] {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("backends.{name} must be >= 0, got {t}"));
            }
        }
        if self.backends.max_tokens < 1 {
            return bad("backends.max_tokens must be >= 1".into());
        }
        self.fitness.schedule.validate().map_err(|e| ConfigError(format!("fitness.schedule: {e}")))?;
        if let Some(w) = &self.fitness.aggregator.weights {
            if w.is_empty() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad("fitness.aggregator.weights must be positive".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_gets_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"mode": "solution_search"}"#).unwrap();
        assert_eq!(c, RunConfig::new(Mode::SolutionSearch));
        assert!(c.validate().is_ok());
        assert_eq!(c.strategies[0].effective_group_size(&c.selection), 2);
        assert_eq!(c.strategies[1].effective_group_size(&c.selection), 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"mode": "solution_search", "pop": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"mode": "solution_search", "selection": {"k": 3}}"#).is_err());
    }

    #[test]
    fn bounds_named() {
        let c = RunConfig { population_size: 1, ..RunConfig::new(Mode::SolutionSearch) };
        assert!(c.validate().unwrap_err().to_string().contains("population_size"));
        let mut c = RunConfig::new(Mode::HeuristicSearch);
        c.reflection.cadence = 0;
        assert!(c.validate().unwrap_err().to_string().contains("cadence"));
    }

    #[test]
    fn serde_round_trip() {
        let mut c = RunConfig::new(Mode::HeuristicSearch);
        c.budget.target_cost = Some(0.0);
        c.strategies[0].task_instruction = Some("x".into());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }
}
