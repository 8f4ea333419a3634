//! Problem plugins: Euclidean TSP for direct solution search and online bin
//! packing for heuristic search.

pub mod bpp;
pub mod io;
pub mod tsp;

pub use bpp::{
    bpp_best_fit, bpp_first_fit, bpp_lower_bound, bpp_pack, excess_ratio, gen_bpp, BppInstance,
    PackError, Packing, BPP_VARS,
};
pub use io::{load_instance, save_instance, Instance, LoadError};
pub use tsp::{
    canonical_cycle, gen_tsp, tsp_brute_force, tsp_nearest_neighbor, tsp_tour_length, tsp_validate, PermutationError,
    Point, Rect, TourPermutation, TspInstance,
};

use crate::digest::Digester;

/// An instance violated its own invariants.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid instance: {0}")]
pub struct InstanceError(pub String);

impl InstanceError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// Instances a heuristic is scored on, with optional per-instance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    instances: Vec<BppInstance>,
    weights: Option<Vec<f64>>,
    digest: u64,
}

impl TrainingSet {
    /// Weights, when given, must be positive and match the instance count;
    /// they are stored normalised to sum to one.
    pub fn new(instances: Vec<BppInstance>, weights: Option<Vec<f64>>) -> Result<Self, InstanceError> {
        if instances.is_empty() {
            return Err(InstanceError::new("training set is empty"));
        }
        let weights = match weights {
            None => None,
            Some(w) => {
                Self::check_weights(&w, instances.len())?;
                let total: f64 = w.iter().sum();
                Some(w.iter().map(|x| x / total).collect())
            }
        };
        Ok(Self::assemble(instances, weights))
    }

    /// Like [`TrainingSet::new`] but keeps the weights bit-for-bit, for
    /// weights that were normalised before (e.g. read back from a run log).
    pub fn from_normalized(instances: Vec<BppInstance>, weights: Option<Vec<f64>>) -> Result<Self, InstanceError> {
        if instances.is_empty() {
            return Err(InstanceError::new("training set is empty"));
        }
        if let Some(w) = &weights {
            Self::check_weights(w, instances.len())?;
        }
        Ok(Self::assemble(instances, weights))
    }

    fn check_weights(w: &[f64], n: usize) -> Result<(), InstanceError> {
        if w.len() != n {
            return Err(InstanceError::new(format!("{} weights for {n} instances", w.len())));
        }
        if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(InstanceError::new("weights must be positive and finite"));
        }
        Ok(())
    }

    fn assemble(instances: Vec<BppInstance>, weights: Option<Vec<f64>>) -> Self {
        let mut d = Digester::new();
        d.bytes(b"training").u64(instances.len() as u64);
        for inst in &instances {
            d.u64(inst.digest());
        }
        if let Some(w) = &weights {
            for &x in w {
                d.f64(x);
            }
        }
        let digest = d.finish();
        Self { instances, weights, digest }
    }

    pub fn instances(&self) -> &[BppInstance] {
        &self.instances
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }
}

/// The data a run optimises over: one TSP instance for solution search or a
/// bin-packing training set for heuristic search.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Tsp(TspInstance),
    Bpp(TrainingSet),
}

impl Problem {
    pub fn digest(&self) -> u64 {
        match self {
            Problem::Tsp(t) => t.digest(),
            Problem::Bpp(s) => s.digest(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Tsp(_) => "tsp",
            Problem::Bpp(_) => "bpp",
        }
    }
}
