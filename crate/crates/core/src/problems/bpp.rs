//! Online one-dimensional bin packing driven by a scoring expression, plus
//! the textbook first-fit and best-fit baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InstanceError;
use crate::digest::Digester;
use crate::hdsl::{BoundExpr, EvalError, Expr};

/// Variables a packing heuristic may reference, in binding order:
/// remaining capacity of the bin, item size, 0-based bin index, open bins.
pub const BPP_VARS: [&str; 4] = ["cap", "item", "index", "n_bins"];

#[derive(Debug, Clone, PartialEq)]
pub struct BppInstance {
    name: String,
    capacity: f64,
    items: Vec<f64>,
    digest: u64,
}

impl BppInstance {
    pub fn new(name: impl Into<String>, capacity: f64, items: Vec<f64>) -> Result<Self, InstanceError> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(InstanceError::new(format!("capacity must be positive and finite, got {capacity}")));
        }
        if items.is_empty() {
            return Err(InstanceError::new("instance has no items"));
        }
        for (i, &item) in items.iter().enumerate() {
            if !(item.is_finite() && item > 0.0) {
                return Err(InstanceError::new(format!("item {i} must be positive and finite, got {item}")));
            }
            if item > capacity {
                return Err(InstanceError::new(format!(
                    "item {i} of size {item} exceeds capacity {capacity}"
                )));
            }
        }
        let mut d = Digester::new();
        d.bytes(b"bpp").f64(capacity).u64(items.len() as u64);
        for &item in &items {
            d.f64(item);
        }
        let digest = d.finish();
        Ok(Self { name: name.into(), capacity, items, digest })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn items(&self) -> &[f64] {
        &self.items
    }

    /// Digest of capacity and item sequence; the name does not participate.
    pub fn digest(&self) -> u64 {
        self.digest
    }
}

/// Items per bin, bins in opening order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Packing {
    pub bins: Vec<Vec<f64>>,
}

impl Packing {
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn loads(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PackError {
    #[error("heuristic references {0:?}; only cap, item, index, n_bins are bound")]
    Unbound(String),
    #[error("heuristic failed on item {item} (bin {bin}): {message}")]
    Domain { item: usize, bin: usize, message: String },
}

/// Packs items in order. For each item every open bin with enough room is
/// scored with `{cap: remaining, item, index, n_bins}`; the item goes to the
/// highest-scoring bin (lowest index on ties), or to a new bin when no open
/// bin has room.
pub fn bpp_pack(inst: &BppInstance, expr: &Expr) -> Result<Packing, PackError> {
    let bound = BoundExpr::bind(expr, &BPP_VARS).map_err(|e| match e {
        EvalError::UnboundVariable(name) => PackError::Unbound(name),
        EvalError::Domain(message) => PackError::Domain { item: 0, bin: 0, message },
    })?;
    pack_bound(inst, &bound)
}

pub(crate) fn pack_bound(inst: &BppInstance, bound: &BoundExpr) -> Result<Packing, PackError> {
    let mut bins: Vec<Vec<f64>> = Vec::new();
    let mut remaining: Vec<f64> = Vec::new();
    for (item_idx, &item) in inst.items().iter().enumerate() {
        let n_bins = bins.len() as f64;
        let mut chosen: Option<(usize, f64)> = None;
        for (bin, &room) in remaining.iter().enumerate() {
            if room < item {
                continue;
            }
            let score = bound
                .eval(&[room, item, bin as f64, n_bins])
                .map_err(|e| PackError::Domain { item: item_idx, bin, message: e.to_string() })?;
            if chosen.is_none_or(|(_, best)| score > best) {
                chosen = Some((bin, score));
            }
        }
        match chosen {
            Some((bin, _)) => {
                bins[bin].push(item);
                remaining[bin] -= item;
            }
            None => {
                bins.push(vec![item]);
                remaining.push(inst.capacity() - item);
            }
        }
    }
    Ok(Packing { bins })
}

/// ceil(total size / capacity).
pub fn bpp_lower_bound(inst: &BppInstance) -> usize {
    let total: f64 = inst.items().iter().sum();
    (total / inst.capacity()).ceil() as usize
}

/// (bins - lb) / lb.
pub fn excess_ratio(bins: usize, lower_bound: usize) -> f64 {
    (bins as f64 - lower_bound as f64) / lower_bound as f64
}

/// Online first-fit: each item goes to the lowest-indexed bin with room.
pub fn bpp_first_fit(inst: &BppInstance) -> Packing {
    let mut packing = Packing::default();
    let mut free: Vec<f64> = Vec::new();
    'items: for &item in inst.items() {
        for (i, slot) in free.iter_mut().enumerate() {
            if *slot >= item {
                *slot -= item;
                packing.bins[i].push(item);
                continue 'items;
            }
        }
        free.push(inst.capacity() - item);
        packing.bins.push(vec![item]);
    }
    packing
}

/// Online best-fit: each item goes to the bin it leaves with the least room
/// (lowest index on ties); a new bin only when nothing fits.
pub fn bpp_best_fit(inst: &BppInstance) -> Packing {
    let mut packing = Packing::default();
    let mut free: Vec<f64> = Vec::new();
    for &item in inst.items() {
        let mut target = None;
        let mut tightest = f64::INFINITY;
        for (i, &slot) in free.iter().enumerate() {
            if slot >= item && slot < tightest {
                tightest = slot;
                target = Some(i);
            }
        }
        if let Some(i) = target {
            free[i] -= item;
            packing.bins[i].push(item);
        } else {
            free.push(inst.capacity() - item);
            packing.bins.push(vec![item]);
        }
    }
    packing
}

/// `n_items` integer sizes drawn uniformly from `[lo, hi]` (bounds rounded
/// inward to integers); a pure function of `seed`.
pub fn gen_bpp(seed: u64, n_items: usize, capacity: f64, size_range: (f64, f64)) -> Result<BppInstance, InstanceError> {
    let (lo, hi) = size_range;
    if n_items == 0 {
        return Err(InstanceError::new("need at least one item"));
    }
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(InstanceError::new(format!("capacity must be positive, got {capacity}")));
    }
    if hi > capacity {
        return Err(InstanceError::new(format!("largest size {hi} exceeds capacity {capacity}")));
    }
    let lo_i = lo.ceil().max(1.0);
    let hi_i = hi.floor();
    if !(lo_i.is_finite() && hi_i.is_finite()) || lo_i > hi_i {
        return Err(InstanceError::new(format!(
            "size range [{lo}, {hi}] holds no integer size in 1..={capacity}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo_u, hi_u) = (lo_i as u64, hi_i as u64);
    let items = (0..n_items).map(|_| rng.gen_range(lo_u..=hi_u) as f64).collect();
    BppInstance::new(format!("bpp-{seed}-{n_items}"), capacity, items)
}
