//! The evolutionary loop: initialise, evaluate, then repeatedly select
//! parents, ask the variation backend for offspring, evaluate them, keep the
//! best N, and every R generations let the reflective backend rewrite the
//! task instructions.
//!
//! Backend calls and evaluations may run concurrently, but results are
//! always merged in correlation-id order, so a run is a pure function of its
//! configuration, problem and backend answers.

use std::io;
use std::sync::Arc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::candidate::{
    rank_cmp, Candidate, CandidateError, CandidateId, CandidateKind, FitnessValue, Payload, Population, Provenance,
};
use crate::config::{ConfigError, FitnessConfig, Mode, RunConfig, SelectionConfig, StrategySpec};
use crate::digest::{derive_seed, hex};
use crate::fitness::{adaptive_weight, eval_heuristic, eval_solution, rescore, CacheKey, FitnessCache};
use crate::hdsl::{self, random_expr};
use crate::llmio::{Backend, CompletionRequest, LlmError};
use crate::problems::io::problem_to_json;
use crate::problems::tsp::random_tour;
use crate::problems::{tsp_nearest_neighbor, Problem, BPP_VARS};
use crate::prompting::{
    default_instruction, describe_problem, parse_candidates, parse_instruction, render_reflective_prompt,
    render_variation_prompt, Example, OffspringReport, OutputSpec, ReflectivePromptSpec, VariationPromptSpec,
    PROMPT_FORMAT_VERSION,
};
use crate::runlog::{RecordKind, RunLog};

/// Seed expressions for heuristic search: first fit, worst fit, best fit.
pub const SEED_EXPRESSIONS: [&str; 3] = ["-index", "cap - item", "-(cap - item)"];

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("backend: {0}")]
    Backend(#[from] LlmError),
    #[error("run log: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    CallBudget,
    EvaluationBudget,
    TargetReached,
}

/// Backends bound to the two roles.
#[derive(Clone)]
pub struct Backends {
    pub variation: Arc<dyn Backend>,
    pub reflective: Arc<dyn Backend>,
}

impl Backends {
    /// One backend serving both roles.
    pub fn shared(backend: Arc<dyn Backend>) -> Self {
        Self { variation: backend.clone(), reflective: backend }
    }

    /// Builds the bindings named in the config. Roles with identical
    /// bindings share one backend, so a single script feeds both in order.
    pub fn from_config(config: &RunConfig) -> Result<Self, LlmError> {
        let b = &config.backends;
        let variation: Arc<dyn Backend> = Arc::from(b.variation.build(config.seed)?);
        let reflective = if b.reflective == b.variation {
            variation.clone()
        } else {
            Arc::from(b.reflective.build(config.seed)?)
        };
        Ok(Self { variation, reflective })
    }
}

/// Fitness evaluation with memoisation.
pub struct Evaluator<'a> {
    problem: &'a Problem,
    fitness: &'a FitnessConfig,
    problem_digest: u64,
    cache: FitnessCache,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a Problem, fitness: &'a FitnessConfig) -> Self {
        Self { problem, fitness, problem_digest: problem.digest(), cache: FitnessCache::new() }
    }

    fn epoch(&self, t: u32) -> u64 {
        match self.problem {
            Problem::Tsp(_) => 0,
            Problem::Bpp(_) => self.fitness.schedule.epoch(t),
        }
    }

    /// Fitness of `cand` at generation `t`.
    pub fn evaluate(&self, cand: &Candidate, t: u32) -> FitnessValue {
        let key = CacheKey::for_candidate(cand, self.problem_digest, self.epoch(t));
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let value = match self.problem {
            Problem::Tsp(inst) => eval_solution(inst, cand),
            Problem::Bpp(train) => eval_heuristic(cand, train, &self.fitness.aggregator, t, &self.fitness.schedule)
                .expect("aggregator checked against the training set before the run"),
        };
        self.cache.put(key, value.clone());
        value
    }

    /// Re-weights the size penalty of an evaluated candidate for generation
    /// `t`, reusing its base objective.
    pub fn rescore(&self, cand: &Candidate, t: u32) -> FitnessValue {
        let current = cand.fitness().cloned().unwrap_or_else(|| self.evaluate(cand, t));
        if matches!(self.problem, Problem::Tsp(_)) {
            return current;
        }
        let key = CacheKey::for_candidate(cand, self.problem_digest, self.epoch(t));
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let sched = &self.fitness.schedule;
        let value = rescore(&current, cand.complexity(), adaptive_weight(t, sched), sched.size_budget);
        self.cache.put(key, value.clone());
        value
    }

    pub fn cache(&self) -> &FitnessCache {
        &self.cache
    }
}

fn check_problem(config: &RunConfig, problem: &Problem) -> Result<(), ConfigError> {
    match (config.mode, problem) {
        (Mode::SolutionSearch, Problem::Tsp(_)) => Ok(()),
        (Mode::HeuristicSearch, Problem::Bpp(train)) => config
            .fitness
            .aggregator
            .check_for(train)
            .map_err(|e| ConfigError(format!("fitness.aggregator: {e}"))),
        (Mode::SolutionSearch, _) => Err(ConfigError("solution_search needs a TSP instance".into())),
        (Mode::HeuristicSearch, _) => Err(ConfigError("heuristic_search needs a bin-packing training set".into())),
    }
}

fn candidate(id: CandidateId, payload: Payload, label: &str) -> Candidate {
    Candidate::new(id, payload, Provenance::initial(label)).expect("generation 1 provenance is valid")
}

/// Generation-1 population with ids `1..=N`, unevaluated.
///
/// Solution search starts from the nearest-neighbour tour plus N-1 random
/// tours. Heuristic search starts from the seed expressions followed by
/// random expressions of depth at most 3.
pub fn initialize<R: Rng + ?Sized>(config: &RunConfig, problem: &Problem, rng: &mut R) -> Population {
    let n = config.population_size;
    let mut members = Vec::with_capacity(n);
    match problem {
        Problem::Tsp(inst) => {
            members.push(candidate(1, Payload::Tour(tsp_nearest_neighbor(inst, 0)), "init:nearest_neighbor"));
            for id in 2..=n as CandidateId {
                members.push(candidate(id, Payload::Tour(random_tour(rng, inst.len())), "init:random"));
            }
        }
        Problem::Bpp(_) => {
            for (i, text) in SEED_EXPRESSIONS.iter().take(n).enumerate() {
                let expr = hdsl::parse(text).expect("seed expressions parse");
                members.push(candidate(i as CandidateId + 1, Payload::Heuristic(expr), "init:seed"));
            }
            for id in members.len() as CandidateId + 1..=n as CandidateId {
                let expr = loop {
                    let e = random_expr(rng, &BPP_VARS, 3);
                    if e.complexity() <= config.max_expr_size {
                        break e;
                    }
                };
                members.push(candidate(id, Payload::Heuristic(expr), "init:random"));
            }
        }
    }
    Population::new(1, members)
}

/// Index of the tournament winner among `pool`: `k` uniform draws with
/// replacement, lowest cost wins, ties go to the lower id.
pub fn tournament<R: Rng + ?Sized>(members: &[Candidate], pool: &[usize], k: usize, rng: &mut R) -> usize {
    let mut winner = pool[rng.gen_range(0..pool.len())];
    for _ in 1..k {
        let challenger = pool[rng.gen_range(0..pool.len())];
        let (a, b) = (&members[challenger], &members[winner]);
        if a.cost().total_cmp(&b.cost()).then(a.id().cmp(&b.id())).is_lt() {
            winner = challenger;
        }
    }
    winner
}

/// Parents for one prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentGroup {
    /// Index into the run's strategies.
    pub strategy: usize,
    /// Indices into the population's members.
    pub members: Vec<usize>,
}

/// G groups per strategy, each slot filled by a tournament among the
/// members not already in the group (or among everyone once the population
/// is used up).
pub fn select_parents<R: Rng + ?Sized>(
    pop: &Population,
    selection: &SelectionConfig,
    strategies: &[StrategySpec],
    rng: &mut R,
) -> Vec<ParentGroup> {
    let everyone: Vec<usize> = (0..pop.len()).collect();
    let mut groups = Vec::new();
    for (si, strategy) in strategies.iter().enumerate() {
        let m = strategy.effective_group_size(selection);
        for _ in 0..selection.groups_per_generation {
            let mut members: Vec<usize> = Vec::with_capacity(m);
            for _ in 0..m {
                let pool: Vec<usize> = everyone.iter().copied().filter(|i| !members.contains(i)).collect();
                let pool = if pool.is_empty() { &everyone } else { &pool };
                members.push(tournament(&pop.members, pool, selection.tournament_size, rng));
            }
            groups.push(ParentGroup { strategy: si, members });
        }
    }
    groups
}

/// (mu + lambda) truncation: the `n` best of parents and offspring by
/// [`rank_cmp`].
pub fn survivor_select(parents: Vec<Candidate>, offspring: Vec<Candidate>, n: usize) -> Vec<Candidate> {
    let mut all = parents;
    all.extend(offspring);
    all.sort_by(rank_cmp);
    all.truncate(n);
    all
}

/// Calls `backend` for every request, at most `max_inflight` at a time, and
/// returns the outcomes in request order.
fn call_all(backend: &dyn Backend, requests: &[CompletionRequest]) -> Vec<Result<String, LlmError>> {
    let width = backend.max_inflight().clamp(1, 16);
    if width == 1 || requests.len() < 2 {
        return requests.iter().map(|r| backend.complete(r)).collect();
    }
    let mut out = Vec::with_capacity(requests.len());
    for chunk in requests.chunks(width) {
        thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|r| s.spawn(move || backend.complete(r))).collect();
            out.extend(handles.into_iter().map(|h| h.join().expect("backend call panicked")));
        });
    }
    out
}

fn response_body(correlation_id: &str, outcome: &Result<String, LlmError>) -> Value {
    match outcome {
        Ok(text) => json!({ "correlation_id": correlation_id, "text": text }),
        Err(e) => json!({
            "correlation_id": correlation_id,
            "error": { "kind": e.kind(), "detail": e.detail(), "retriable": e.is_retriable() },
        }),
    }
}

fn candidate_json(c: &Candidate) -> Value {
    json!({
        "id": c.id(),
        "kind": c.kind().as_str(),
        "payload": c.payload().render(),
        "description": c.description(),
        "knowledge_tags": c.knowledge_tags(),
        "cost": c.cost(),
        "feasible": c.is_feasible(),
        "generation_created": c.provenance().generation_created,
        "parent_ids": c.provenance().parent_ids,
        "operator": c.provenance().operator_label,
    })
}

/// What a finished run returns.
pub struct RunOutcome {
    /// Lowest-cost candidate seen during the run.
    pub best: Candidate,
    pub population: Population,
    pub log: RunLog,
    /// Iterations of the loop that completed.
    pub generations_run: u32,
    pub backend_calls: u64,
    pub evaluations: u64,
    pub stop_reason: StopReason,
    /// Task instruction of each strategy at the end of the run.
    pub instructions: Vec<String>,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

struct RunState<'a> {
    config: &'a RunConfig,
    backends: &'a Backends,
    evaluator: Evaluator<'a>,
    output: OutputSpec,
    problem_text: String,
    population: Population,
    best_so_far: Candidate,
    trajectory: Vec<f64>,
    instructions: Vec<String>,
    rng: ChaCha8Rng,
    next_id: CandidateId,
    calls: u64,
    evaluations: u64,
    log: RunLog,
}

/// An offspring with the information reflection needs about its origin.
struct Child {
    strategy: usize,
    parent_cost: f64,
    candidate: Candidate,
}

impl RunState<'_> {
    fn calls_left(&self) -> u64 {
        self.config.budget.max_backend_calls.map_or(u64::MAX, |m| m.saturating_sub(self.calls))
    }

    fn evaluations_left(&self) -> u64 {
        self.config.budget.max_evaluations.map_or(u64::MAX, |m| m.saturating_sub(self.evaluations))
    }

    fn target_reached(&self) -> bool {
        self.config.budget.target_cost.is_some_and(|t| self.best_so_far.cost() <= t)
    }

    fn evaluate_all(&mut self, cands: Vec<Candidate>, t: u32) -> Vec<Candidate> {
        self.evaluations += cands.len() as u64;
        let evaluator = &self.evaluator;
        cands
            .into_par_iter()
            .map(|c| {
                let f = evaluator.evaluate(&c, t);
                c.evaluated(f)
            })
            .collect()
    }

    fn lambda(&self, t: u32) -> f64 {
        match self.config.mode {
            Mode::SolutionSearch => 0.0,
            Mode::HeuristicSearch => adaptive_weight(t, &self.config.fitness.schedule),
        }
    }

    fn log_generation(&mut self, offspring: usize, diagnostics: Vec<Value>) -> io::Result<()> {
        let pop = &self.population;
        let best = pop.best().expect("population is never empty");
        let body = json!({
            "population_digest": hex(pop.digest()),
            "best_cost": best.cost(),
            "best_so_far_cost": self.best_so_far.cost(),
            "best_so_far_id": self.best_so_far.id(),
            "lambda": self.lambda(pop.generation),
            "backend_calls": self.calls,
            "evaluations": self.evaluations,
            "offspring": offspring,
            "diagnostics": diagnostics,
            "members": pop.members.iter().map(candidate_json).collect::<Vec<_>>(),
        });
        self.log.push(RecordKind::Generation, pop.generation, body)?;
        self.log.flush()
    }

    fn update_best(&mut self) {
        let best = self.population.best().expect("population is never empty");
        if rank_cmp(best, &self.best_so_far).is_lt() {
            self.best_so_far = best.clone();
        }
    }

    /// One pass of select, vary, evaluate, survive. Returns the offspring
    /// and whether a budget ran out part-way.
    fn iterate(&mut self, t: u32) -> io::Result<(Vec<Child>, Option<StopReason>)> {
        let groups = select_parents(&self.population, &self.config.selection, &self.config.strategies, &mut self.rng);
        let mut stop = None;
        let mut counters = vec![0usize; self.config.strategies.len()];
        let mut requests = Vec::new();
        let mut call_groups = Vec::new();
        for group in groups {
            let si = group.strategy;
            let gi = counters[si];
            counters[si] += 1;
            if requests.len() as u64 >= self.calls_left() {
                stop = Some(StopReason::CallBudget);
                break;
            }
            let strategy = &self.config.strategies[si];
            let mut parents: Vec<&Candidate> = group.members.iter().map(|&i| &self.population.members[i]).collect();
            parents.sort_by(|a, b| rank_cmp(a, b));
            let examples = parents
                .iter()
                .take(strategy.examples_per_prompt)
                .map(|c| Example {
                    payload: c.payload().render(),
                    cost: c.cost(),
                    description: c.description().map(String::from),
                    tags: c.knowledge_tags().to_vec(),
                })
                .collect();
            let prompt = render_variation_prompt(&VariationPromptSpec {
                problem_description: self.problem_text.clone(),
                task_instruction: self.instructions[si].clone(),
                examples,
                output: self.output.clone(),
                offspring_requested: strategy.offspring_requested,
            });
            let cid = format!("g{t:05}-s{si:02}-p{gi:03}");
            requests.push(CompletionRequest::user(
                prompt,
                self.config.backends.variation_temperature,
                self.config.backends.max_tokens,
                cid,
            ));
            call_groups.push(group);
        }

        let outcomes = call_all(self.backends.variation.as_ref(), &requests);
        self.calls += requests.len() as u64;

        let mut children = Vec::new();
        let mut diagnostics = Vec::new();
        for ((req, outcome), group) in requests.iter().zip(&outcomes).zip(&call_groups) {
            let strategy = &self.config.strategies[group.strategy];
            self.log.push(
                RecordKind::Prompt,
                t,
                json!({
                    "correlation_id": req.correlation_id,
                    "role": "variation",
                    "strategy": strategy.label,
                    "temperature": req.temperature,
                    "max_tokens": req.max_tokens,
                    "text": req.prompt(),
                }),
            )?;
            self.log.push(RecordKind::Response, t, response_body(&req.correlation_id, outcome))?;
            let text = match outcome {
                Ok(text) => text,
                Err(e) => {
                    diagnostics.push(json!({ "correlation_id": req.correlation_id, "message": e.to_string() }));
                    continue;
                }
            };
            let report = match parse_candidates(text, &self.output, strategy.offspring_requested) {
                Ok(r) => r,
                Err(e) => {
                    diagnostics.push(json!({ "correlation_id": req.correlation_id, "message": e.to_string() }));
                    continue;
                }
            };
            for d in &report.diagnostics {
                diagnostics.push(json!({
                    "correlation_id": req.correlation_id,
                    "block": d.block,
                    "message": d.message,
                }));
            }
            let parents: Vec<&Candidate> = group.members.iter().map(|&i| &self.population.members[i]).collect();
            let parent_cost = parents.iter().map(|p| p.cost()).fold(f64::INFINITY, f64::min);
            let mut parent_ids: Vec<CandidateId> = parents.iter().map(|p| p.id()).collect();
            parent_ids.dedup();
            for parsed in report.candidates {
                let id = self.next_id;
                self.next_id += 1;
                let mut builder = Candidate::builder(id, parsed.payload)
                    .kind(self.output.kind())
                    .provenance(Provenance {
                        generation_created: t + 1,
                        parent_ids: parent_ids.clone(),
                        operator_label: strategy.label.clone(),
                    });
                if let Some(d) = parsed.description {
                    builder = builder.description(d).tags(parsed.tags);
                }
                match builder.build() {
                    Ok(candidate) => children.push(Child { strategy: group.strategy, parent_cost, candidate }),
                    Err(CandidateError::KindMismatch { .. } | CandidateError::TagsWithoutDescription | CandidateError::GenerationZero) => {
                        diagnostics.push(json!({ "correlation_id": req.correlation_id, "message": "rejected candidate" }))
                    }
                }
            }
        }

        let left = self.evaluations_left();
        if (children.len() as u64) > left {
            children.truncate(left as usize);
            stop.get_or_insert(StopReason::EvaluationBudget);
        }
        let next = t + 1;
        let (meta, cands): (Vec<(usize, f64)>, Vec<Candidate>) =
            children.into_iter().map(|c| ((c.strategy, c.parent_cost), c.candidate)).unzip();
        let evaluated = self.evaluate_all(cands, next);
        let children: Vec<Child> = meta
            .into_iter()
            .zip(evaluated)
            .map(|((strategy, parent_cost), candidate)| Child { strategy, parent_cost, candidate })
            .collect();

        let evaluator = &self.evaluator;
        let parents: Vec<Candidate> = std::mem::take(&mut self.population.members)
            .into_par_iter()
            .map(|c| {
                let f = evaluator.rescore(&c, next);
                c.evaluated(f)
            })
            .collect();
        let offspring: Vec<Candidate> = children.iter().map(|c| c.candidate.clone()).collect();
        let count = offspring.len();
        self.population = Population::new(next, survivor_select(parents, offspring, self.config.population_size));
        self.update_best();
        self.trajectory.push(self.best_so_far.cost());
        self.log_generation(count, diagnostics)?;
        Ok((children, stop))
    }

    fn reflect(&mut self, t: u32, children: &[Child]) -> io::Result<()> {
        for si in 0..self.config.strategies.len() {
            if self.calls_left() == 0 {
                break;
            }
            let label = self.config.strategies[si].label.clone();
            let short_term = children
                .iter()
                .filter(|c| c.strategy == si)
                .map(|c| OffspringReport {
                    payload: c.candidate.payload().render(),
                    parent_cost: c.parent_cost,
                    cost: c.candidate.cost(),
                })
                .collect();
            let prompt = render_reflective_prompt(&ReflectivePromptSpec {
                current_instruction: self.instructions[si].clone(),
                short_term,
                long_term: self.trajectory.clone(),
            });
            let cid = format!("r{t:05}-s{si:02}");
            let req = CompletionRequest::user(
                prompt,
                self.config.backends.reflection_temperature,
                self.config.backends.max_tokens,
                cid.clone(),
            );
            let outcome = self.backends.reflective.complete(&req);
            self.calls += 1;
            self.log.push(
                RecordKind::Prompt,
                t,
                json!({
                    "correlation_id": cid,
                    "role": "reflective",
                    "strategy": label,
                    "temperature": req.temperature,
                    "max_tokens": req.max_tokens,
                    "text": req.prompt(),
                }),
            )?;
            self.log.push(RecordKind::Response, t, response_body(&cid, &outcome))?;
            let old = self.instructions[si].clone();
            let parsed = outcome.map_err(|e| e.to_string()).and_then(|text| parse_instruction(&text).map_err(|e| e.to_string()));
            let body = match parsed {
                Ok(new) => {
                    self.instructions[si] = new.clone();
                    json!({ "strategy": label, "correlation_id": cid, "old": old, "new": new, "changed": old != new })
                }
                Err(warning) => json!({
                    "strategy": label,
                    "correlation_id": cid,
                    "old": old,
                    "new": old,
                    "changed": false,
                    "warning": warning,
                }),
            };
            self.log.push(RecordKind::Reflection, t, body)?;
        }
        self.log.flush()
    }
}

/// Runs the loop. Records go to `log`, which may mirror them to a file.
pub fn run(config: &RunConfig, problem: &Problem, backends: &Backends, log: RunLog) -> Result<RunOutcome, EngineError> {
    config.validate()?;
    check_problem(config, problem)?;
    let kind = match config.mode {
        Mode::SolutionSearch => CandidateKind::Solution,
        Mode::HeuristicSearch => CandidateKind::Heuristic,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0));
    let initial = initialize(config, problem, &mut rng);
    let placeholder = initial.members[0].clone();
    let mut state = RunState {
        config,
        backends,
        evaluator: Evaluator::new(problem, &config.fitness),
        output: OutputSpec::for_problem(problem, config.max_expr_size),
        problem_text: describe_problem(problem),
        population: Population::new(1, Vec::new()),
        best_so_far: placeholder,
        trajectory: Vec::new(),
        instructions: config
            .strategies
            .iter()
            .map(|s| s.task_instruction.clone().unwrap_or_else(|| default_instruction(s.family, kind)))
            .collect(),
        rng,
        next_id: initial.len() as CandidateId + 1,
        calls: 0,
        evaluations: 0,
        log,
    };

    state.log.push(
        RecordKind::Meta,
        0,
        json!({
            "prompt_format_version": PROMPT_FORMAT_VERSION,
            "config": config,
            "problem": problem_to_json(problem),
            "problem_digest": hex(problem.digest()),
        }),
    )?;

    let members = state.evaluate_all(initial.members, 1);
    state.population = Population::new(1, members);
    state.best_so_far = state.population.best().expect("N >= 2").clone();
    state.log_generation(0, Vec::new())?;

    let mut stop = StopReason::Completed;
    let mut generations_run = 0;
    if state.target_reached() {
        stop = StopReason::TargetReached;
    } else {
        for t in 1..=config.generations {
            if state.calls_left() == 0 {
                stop = StopReason::CallBudget;
                break;
            }
            if state.evaluations_left() == 0 {
                stop = StopReason::EvaluationBudget;
                break;
            }
            let (children, cut) = state.iterate(t)?;
            generations_run = t;
            if config.reflection.enabled && t % config.reflection.cadence == 0 {
                state.reflect(t, &children)?;
            }
            if let Some(reason) = cut {
                stop = reason;
                break;
            }
            if state.target_reached() {
                stop = StopReason::TargetReached;
                break;
            }
        }
    }

    let best = state.best_so_far.clone();
    let result = json!({
        "best_cost": best.cost(),
        "best_candidate": candidate_json(&best),
        "generations_run": generations_run,
        "backend_calls": state.calls,
        "evaluations": state.evaluations,
        "stop_reason": stop,
        "instructions": state.instructions,
    });
    let generation = state.population.generation;
    state.log.push(RecordKind::Result, generation, result)?;
    state.log.flush()?;
    Ok(RunOutcome {
        best,
        population: state.population,
        generations_run,
        backend_calls: state.calls,
        evaluations: state.evaluations,
        stop_reason: stop,
        instructions: state.instructions,
        cache_hits: state.evaluator.cache().hits(),
        cache_misses: state.evaluator.cache().misses(),
        log: state.log,
    })
}
