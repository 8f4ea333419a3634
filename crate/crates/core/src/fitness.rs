//! Fitness evaluation.
//!
//! Solutions are scored by their objective directly. Heuristics are run on
//! every instance of a training set; the per-instance excess ratios are
//! combined by an [`Aggregator`] and a parsimony penalty, weighted by a
//! schedule that starts relaxed and tightens over the generations, is added
//! for expressions larger than a size budget.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::candidate::{candidate_digest, Candidate, FitnessValue, Payload};
use crate::hdsl::BoundExpr;
use crate::problems::bpp::pack_bound;
use crate::problems::{bpp_lower_bound, excess_ratio, tsp_tour_length, TrainingSet, TspInstance, BPP_VARS};

pub const BASE: &str = "base";
pub const PENALTY: &str = "penalty";
pub const LAMBDA: &str = "lambda";
pub const COMPLEXITY: &str = "complexity";
pub const LENGTH: &str = "length";
pub const FAILED_INSTANCE: &str = "failed_instance";
pub const INVALID_TOUR: &str = "invalid_tour";

/// Component key of the i-th per-instance score.
pub fn instance_key(i: usize) -> String {
    format!("instance.{i:03}")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitnessError {
    #[error("cannot aggregate an empty list")]
    EmptyInput,
    #[error("{weights} weights for {values} values")]
    WeightMismatch { weights: usize, values: usize },
    #[error("weighted sum needs weights")]
    MissingWeights,
    #[error("weights must be positive and finite")]
    BadWeights,
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    Mean,
    WeightedSum,
}

/// Combines per-instance scores into one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregator {
    pub kind: AggregatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl Default for Aggregator {
    fn default() -> Self {
        Self::mean()
    }
}

impl Aggregator {
    pub fn mean() -> Self {
        Self { kind: AggregatorKind::Mean, weights: None }
    }

    /// Weighted sum with `weights` normalised to sum to one.
    pub fn weighted(weights: Vec<f64>) -> Result<Self, FitnessError> {
        Ok(Self { kind: AggregatorKind::WeightedSum, weights: Some(normalise(&weights)?) })
    }

    /// Weights to use for a training set: the aggregator's own, else the
    /// set's.
    fn effective_weights<'a>(&'a self, train: &'a TrainingSet) -> Option<&'a [f64]> {
        self.weights.as_deref().or(train.weights())
    }

    pub fn check_for(&self, train: &TrainingSet) -> Result<(), FitnessError> {
        if self.kind == AggregatorKind::WeightedSum {
            let w = self.effective_weights(train).ok_or(FitnessError::MissingWeights)?;
            if w.len() != train.len() {
                return Err(FitnessError::WeightMismatch { weights: w.len(), values: train.len() });
            }
        }
        Ok(())
    }
}

fn normalise(weights: &[f64]) -> Result<Vec<f64>, FitnessError> {
    if weights.is_empty() {
        return Err(FitnessError::EmptyInput);
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(FitnessError::BadWeights);
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Arithmetic mean, or the weighted sum with the aggregator's weights.
pub fn aggregate(values: &[f64], agg: &Aggregator) -> Result<f64, FitnessError> {
    aggregate_with(values, agg.kind, agg.weights.as_deref())
}

fn aggregate_with(values: &[f64], kind: AggregatorKind, weights: Option<&[f64]>) -> Result<f64, FitnessError> {
    if values.is_empty() {
        return Err(FitnessError::EmptyInput);
    }
    match kind {
        AggregatorKind::Mean => Ok(values.iter().sum::<f64>() / values.len() as f64),
        AggregatorKind::WeightedSum => {
            let w = weights.ok_or(FitnessError::MissingWeights)?;
            if w.len() != values.len() {
                return Err(FitnessError::WeightMismatch { weights: w.len(), values: values.len() });
            }
            Ok(values.iter().zip(w).map(|(v, w)| v * w).sum())
        }
    }
}

/// Penalty weight ramp: `lambda(t) = lambda_max * min(1, (t / ramp)^p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveSchedule {
    pub lambda_max: f64,
    pub ramp_generations: u32,
    pub exponent: f64,
    pub size_budget: usize,
}

impl Default for AdaptiveSchedule {
    fn default() -> Self {
        Self { lambda_max: 0.0, ramp_generations: 10, exponent: 1.0, size_budget: 25 }
    }
}

impl AdaptiveSchedule {
    pub fn validate(&self) -> Result<(), FitnessError> {
        if !(self.lambda_max.is_finite() && self.lambda_max >= 0.0) {
            return Err(FitnessError::BadSchedule(format!("lambda_max must be >= 0, got {}", self.lambda_max)));
        }
        if self.ramp_generations < 1 {
            return Err(FitnessError::BadSchedule("ramp_generations must be >= 1".into()));
        }
        if !(self.exponent.is_finite() && self.exponent >= 1.0) {
            return Err(FitnessError::BadSchedule(format!("exponent must be >= 1, got {}", self.exponent)));
        }
        if self.size_budget < 1 {
            return Err(FitnessError::BadSchedule("size_budget must be >= 1".into()));
        }
        Ok(())
    }

    /// Cache epoch for generation `t`: generations sharing a penalty weight
    /// share cached costs.
    pub fn epoch(&self, t: u32) -> u64 {
        adaptive_weight(t, self).to_bits()
    }
}

pub fn adaptive_weight(t: u32, sched: &AdaptiveSchedule) -> f64 {
    let progress = f64::from(t) / f64::from(sched.ramp_generations.max(1));
    sched.lambda_max * progress.powf(sched.exponent).min(1.0)
}

/// `lambda * max(0, complexity - budget) / budget`.
pub fn size_penalty(complexity: usize, lambda: f64, size_budget: usize) -> f64 {
    let over = complexity.saturating_sub(size_budget) as f64;
    lambda * over / size_budget as f64
}

/// Tour length as cost; invalid permutations are infeasible.
pub fn eval_solution(inst: &TspInstance, cand: &Candidate) -> FitnessValue {
    let Payload::Tour(tour) = cand.payload() else {
        panic!("eval_solution called on a heuristic candidate");
    };
    match tsp_tour_length(inst, tour) {
        Ok(len) => FitnessValue::feasible(len, BTreeMap::from([(LENGTH.to_string(), len)])),
        Err(_) => FitnessValue::infeasible(BTreeMap::from([(INVALID_TOUR.to_string(), 1.0)])),
    }
}

/// Per-instance excess ratios of a heuristic; `Err(i)` names the first
/// instance on which evaluation failed.
pub fn heuristic_scores(cand: &Candidate, train: &TrainingSet) -> Result<Vec<f64>, usize> {
    let Payload::Heuristic(expr) = cand.payload() else {
        panic!("heuristic_scores called on a solution candidate");
    };
    let bound = BoundExpr::bind(expr, &BPP_VARS).map_err(|_| 0usize)?;
    train
        .instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let packing = pack_bound(inst, &bound).map_err(|_| i)?;
            Ok(excess_ratio(packing.bin_count(), bpp_lower_bound(inst)))
        })
        .collect()
}

/// Aggregated heuristic fitness at generation `t`:
/// `cost = A(s_1..s_k) + lambda(t) * max(0, size - budget) / budget`.
pub fn eval_heuristic(
    cand: &Candidate,
    train: &TrainingSet,
    agg: &Aggregator,
    t: u32,
    sched: &AdaptiveSchedule,
) -> Result<FitnessValue, FitnessError> {
    agg.check_for(train)?;
    let complexity = cand.complexity();
    let scores = match heuristic_scores(cand, train) {
        Ok(s) => s,
        Err(failed) => {
            return Ok(FitnessValue::infeasible(BTreeMap::from([
                (FAILED_INSTANCE.to_string(), failed as f64),
                (COMPLEXITY.to_string(), complexity as f64),
            ])))
        }
    };
    let base = aggregate_with(&scores, agg.kind, agg.effective_weights(train))?;
    let mut components: BTreeMap<String, f64> =
        scores.iter().enumerate().map(|(i, s)| (instance_key(i), *s)).collect();
    components.insert(BASE.to_string(), base);
    components.insert(COMPLEXITY.to_string(), complexity as f64);
    Ok(with_penalty(components, complexity, adaptive_weight(t, sched), sched.size_budget))
}

fn with_penalty(mut components: BTreeMap<String, f64>, complexity: usize, lambda: f64, budget: usize) -> FitnessValue {
    let base = components[BASE];
    let penalty = size_penalty(complexity, lambda, budget);
    components.insert(PENALTY.to_string(), penalty);
    components.insert(LAMBDA.to_string(), lambda);
    FitnessValue::feasible(base + penalty, components)
}

/// Recomputes the penalty of an already evaluated heuristic for a new
/// penalty weight, reusing its base objective. Infeasible values are
/// returned unchanged.
pub fn rescore(fitness: &FitnessValue, complexity: usize, lambda: f64, size_budget: usize) -> FitnessValue {
    if !fitness.feasible || !fitness.components.contains_key(BASE) {
        return fitness.clone();
    }
    with_penalty(fitness.components.clone(), complexity, lambda, size_budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub candidate: u64,
    pub problem: u64,
    pub epoch: u64,
}

impl CacheKey {
    pub fn for_candidate(cand: &Candidate, problem: u64, epoch: u64) -> Self {
        Self { candidate: candidate_digest(cand), problem, epoch }
    }
}

/// Digest-keyed fitness memo, safe for concurrent use. Equal keys always map
/// to equal values, so racing writers are harmless.
#[derive(Debug, Default)]
pub struct FitnessCache {
    entries: Mutex<HashMap<CacheKey, FitnessValue>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl FitnessCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &CacheKey) -> Option<FitnessValue> {
        let found = self.entries.lock().expect("cache lock").get(key).cloned();
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn put(&self, key: CacheKey, value: FitnessValue) {
        self.entries.lock().expect("cache lock").insert(key, value);
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
