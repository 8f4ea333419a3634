//! Population members and their canonical byte form.
//!
//! A candidate is either a direct solution (a tour) or a heuristic (a DSL
//! expression). The optional description and knowledge tags carry the
//! representation form: neither (code-centric), description only (hybrid),
//! or both (augmented). Only the payload is ever evaluated; description and
//! tags travel with the candidate into prompts.
//!
//! Costs are lower-is-better throughout. An objective stated as "maximise f"
//! maps onto this by minimising `-f`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digest::{digest64, Digester};
use crate::hdsl::{self, Expr};
use crate::problems::TourPermutation;

pub type CandidateId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Solution,
    Heuristic,
}

impl CandidateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateKind::Solution => "solution",
            CandidateKind::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for CandidateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Tour(TourPermutation),
    Heuristic(Expr),
}

impl Payload {
    pub fn kind(&self) -> CandidateKind {
        match self {
            Payload::Tour(_) => CandidateKind::Solution,
            Payload::Heuristic(_) => CandidateKind::Heuristic,
        }
    }

    /// Canonical text: comma-separated cities or the printed expression.
    pub fn render(&self) -> String {
        match self {
            Payload::Tour(t) => t.to_string(),
            Payload::Heuristic(e) => hdsl::print(e),
        }
    }

    /// Node count for heuristics, city count for tours.
    pub fn complexity(&self) -> usize {
        match self {
            Payload::Tour(t) => t.len(),
            Payload::Heuristic(e) => e.complexity(),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Payload::Heuristic(e) => Some(e),
            Payload::Tour(_) => None,
        }
    }

    pub fn as_tour(&self) -> Option<&TourPermutation> {
        match self {
            Payload::Tour(t) => Some(t),
            Payload::Heuristic(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    CodeCentric,
    Hybrid,
    Augmented,
}

mod cost_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    // +inf (infeasible) is written as null.
    pub fn serialize<S: Serializer>(cost: &f64, s: S) -> Result<S::Ok, S::Error> {
        if cost.is_finite() {
            s.serialize_f64(*cost)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Evaluated quality of a candidate. Lower cost is better; infeasible
/// values carry `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue {
    #[serde(with = "cost_serde")]
    pub cost: f64,
    pub components: BTreeMap<String, f64>,
    pub feasible: bool,
}

impl FitnessValue {
    pub fn feasible(cost: f64, components: BTreeMap<String, f64>) -> Self {
        debug_assert!(cost.is_finite());
        Self { cost, components, feasible: true }
    }

    pub fn infeasible(components: BTreeMap<String, f64>) -> Self {
        Self { cost: f64::INFINITY, components, feasible: false }
    }

    pub fn component(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generation_created: u32,
    pub parent_ids: Vec<CandidateId>,
    pub operator_label: String,
}

impl Provenance {
    pub fn initial(label: impl Into<String>) -> Self {
        Self { generation_created: 1, parent_ids: Vec::new(), operator_label: label.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CandidateError {
    #[error("{expected} candidate cannot carry a {found} payload")]
    KindMismatch { expected: CandidateKind, found: CandidateKind },
    #[error("knowledge tags require a description")]
    TagsWithoutDescription,
    #[error("generation_created must be at least 1")]
    GenerationZero,
}

/// One population member. Immutable once built; evaluation returns a new
/// value through [`Candidate::evaluated`].
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    id: CandidateId,
    payload: Payload,
    description: Option<String>,
    knowledge_tags: Vec<String>,
    fitness: Option<FitnessValue>,
    provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct CandidateBuilder {
    id: CandidateId,
    payload: Payload,
    expected_kind: Option<CandidateKind>,
    description: Option<String>,
    knowledge_tags: Vec<String>,
    provenance: Provenance,
}

impl CandidateBuilder {
    /// Requires the payload to be of `kind`.
    pub fn kind(mut self, kind: CandidateKind) -> Self {
        self.expected_kind = Some(kind);
        self
    }

    pub fn description(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.knowledge_tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn build(self) -> Result<Candidate, CandidateError> {
        if let Some(expected) = self.expected_kind {
            let found = self.payload.kind();
            if expected != found {
                return Err(CandidateError::KindMismatch { expected, found });
            }
        }
        if self.provenance.generation_created == 0 {
            return Err(CandidateError::GenerationZero);
        }
        let description = self.description.map(|d| d.trim().to_string()).filter(|d| !d.is_empty());
        let mut tags: Vec<String> = self
            .knowledge_tags
            .into_iter()
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        tags.sort();
        tags.dedup();
        if !tags.is_empty() && description.is_none() {
            return Err(CandidateError::TagsWithoutDescription);
        }
        Ok(Candidate {
            id: self.id,
            payload: self.payload,
            description,
            knowledge_tags: tags,
            fitness: None,
            provenance: self.provenance,
        })
    }
}

impl Candidate {
    pub fn builder(id: CandidateId, payload: Payload) -> CandidateBuilder {
        CandidateBuilder {
            id,
            payload,
            expected_kind: None,
            description: None,
            knowledge_tags: Vec::new(),
            provenance: Provenance::initial("init"),
        }
    }

    /// Code-centric candidate with the given provenance.
    pub fn new(id: CandidateId, payload: Payload, provenance: Provenance) -> Result<Self, CandidateError> {
        Self::builder(id, payload).provenance(provenance).build()
    }

    pub fn id(&self) -> CandidateId {
        self.id
    }

    pub fn kind(&self) -> CandidateKind {
        self.payload.kind()
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn knowledge_tags(&self) -> &[String] {
        &self.knowledge_tags
    }

    pub fn representation(&self) -> Representation {
        match (&self.description, self.knowledge_tags.is_empty()) {
            (None, _) => Representation::CodeCentric,
            (Some(_), true) => Representation::Hybrid,
            (Some(_), false) => Representation::Augmented,
        }
    }

    pub fn fitness(&self) -> Option<&FitnessValue> {
        self.fitness.as_ref()
    }

    /// Cost, with unevaluated candidates ordered last.
    pub fn cost(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::INFINITY, |f| f.cost)
    }

    pub fn is_feasible(&self) -> bool {
        self.fitness.as_ref().is_some_and(|f| f.feasible)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn complexity(&self) -> usize {
        self.payload.complexity()
    }

    /// Copy carrying `fitness`.
    pub fn evaluated(mut self, fitness: FitnessValue) -> Self {
        self.fitness = Some(fitness);
        self
    }

    pub fn digest(&self) -> u64 {
        candidate_digest(self)
    }
}

fn escape(text: &str, also_comma: bool) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            ',' if also_comma => out.push_str("\\,"),
            _ => out.push(c),
        }
    }
    out
}

/// Canonical bytes: `kind`, payload, description and tags on four lines
/// joined by `\n`. Empty optionals become empty lines; backslashes and
/// newlines are escaped, tags are comma-joined with commas escaped. The id,
/// fitness and provenance are excluded.
pub fn canonical_serialize(candidate: &Candidate) -> Vec<u8> {
    let tags: Vec<String> = candidate.knowledge_tags.iter().map(|t| escape(t, true)).collect();
    let text = [
        candidate.kind().as_str().to_string(),
        candidate.payload.render(),
        escape(candidate.description.as_deref().unwrap_or(""), false),
        tags.join(","),
    ]
    .join("\n");
    text.into_bytes()
}

/// 64-bit digest of [`canonical_serialize`].
pub fn candidate_digest(candidate: &Candidate) -> u64 {
    digest64(&canonical_serialize(candidate))
}

/// Total order used by selection and survivor selection: cost ascending,
/// two infeasible candidates by lower complexity, then older generation,
/// then lower id.
pub fn rank_cmp(a: &Candidate, b: &Candidate) -> Ordering {
    a.cost()
        .total_cmp(&b.cost())
        .then_with(|| {
            if !a.cost().is_finite() && !b.cost().is_finite() {
                a.complexity().cmp(&b.complexity())
            } else {
                Ordering::Equal
            }
        })
        .then_with(|| a.provenance.generation_created.cmp(&b.provenance.generation_created))
        .then_with(|| a.id.cmp(&b.id))
}

/// The population at one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub generation: u32,
    pub members: Vec<Candidate>,
}

impl Population {
    pub fn new(generation: u32, members: Vec<Candidate>) -> Self {
        Self { generation, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn all_evaluated(&self) -> bool {
        self.members.iter().all(|c| c.fitness.is_some())
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.members.iter().min_by(|a, b| rank_cmp(a, b))
    }

    /// Digest over the members' canonical digests, in order.
    pub fn digest(&self) -> u64 {
        let mut d = Digester::new();
        d.bytes(b"population").u64(self.members.len() as u64);
        for m in &self.members {
            d.u64(candidate_digest(m));
        }
        d.finish()
    }
}
