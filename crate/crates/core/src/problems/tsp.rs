//! Euclidean travelling salesman: instances, tours, a greedy baseline and an
//! exhaustive oracle for small instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InstanceError;
use crate::digest::Digester;

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    name: String,
    points: Vec<Point>,
    digest: u64,
}

impl TspInstance {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self, InstanceError> {
        if points.len() < 3 {
            return Err(InstanceError::new(format!(
                "a TSP instance needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(InstanceError::new(format!("point {i} has a non-finite coordinate")));
        }
        let mut d = Digester::new();
        d.bytes(b"tsp").u64(points.len() as u64);
        for p in &points {
            d.f64(p.x).f64(p.y);
        }
        let digest = d.finish();
        Ok(Self { name: name.into(), points, digest })
    }

    pub fn from_coords(name: impl Into<String>, coords: &[(f64, f64)]) -> Result<Self, InstanceError> {
        Self::new(name, coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Digest of the coordinates; the name does not participate.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.points[a].dist(self.points[b])
    }
}

/// A cyclic visiting order. Validity is relative to an instance size, see
/// [`tsp_validate`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TourPermutation(pub Vec<usize>);

impl TourPermutation {
    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for TourPermutation {
    fn from(order: Vec<usize>) -> Self {
        Self(order)
    }
}

impl fmt::Display for TourPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, city) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{city}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a comma-separated list of city indices: {0:?}")]
pub struct TourSyntaxError(pub String);

impl FromStr for TourPermutation {
    type Err = TourSyntaxError;

    /// Comma-separated non-negative integers; surrounding whitespace and one
    /// optional pair of square brackets are tolerated.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let inner = trimmed
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(trimmed);
        if inner.trim().is_empty() {
            return Err(TourSyntaxError(s.to_string()));
        }
        inner
            .split(',')
            .map(|part| part.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(TourPermutation)
            .map_err(|_| TourSyntaxError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("tour has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("entry {position} is {value}, outside 0..{n}")]
    OutOfRange { position: usize, value: usize, n: usize },
    #[error("entry {position} repeats city {value}")]
    Duplicate { position: usize, value: usize },
}

/// Accepts exactly the permutations of `0..n`; reports the first violation
/// in the order length, then position by position range/duplicate.
pub fn tsp_validate(order: &[usize], n: usize) -> Result<(), PermutationError> {
    if order.len() != n {
        return Err(PermutationError::Length { expected: n, found: order.len() });
    }
    let mut seen = vec![false; n];
    for (position, &value) in order.iter().enumerate() {
        if value >= n {
            return Err(PermutationError::OutOfRange { position, value, n });
        }
        if std::mem::replace(&mut seen[value], true) {
            return Err(PermutationError::Duplicate { position, value });
        }
    }
    Ok(())
}

/// Rotation starting at city 0, oriented so that the second city is lower
/// than the last. Equivalent cycles map to the same representative.
pub fn canonical_cycle(order: &[usize]) -> Vec<usize> {
    let n = order.len();
    let start = order.iter().position(|&c| c == 0).unwrap_or(0);
    let forward: Vec<usize> = (0..n).map(|i| order[(start + i) % n]).collect();
    if n > 2 && forward[1] > forward[n - 1] {
        let mut reversed = Vec::with_capacity(n);
        reversed.push(forward[0]);
        reversed.extend(forward[1..].iter().rev());
        reversed
    } else {
        forward
    }
}

fn cycle_length(inst: &TspInstance, canonical: &[usize]) -> f64 {
    let n = canonical.len();
    (0..n).map(|i| inst.dist(canonical[i], canonical[(i + 1) % n])).sum()
}

/// Closed tour length. Edges are summed along the canonical representative
/// of the cycle, so rotations and reversals of one tour give bit-identical
/// lengths.
pub fn tsp_tour_length(inst: &TspInstance, tour: &TourPermutation) -> Result<f64, PermutationError> {
    tsp_validate(tour.order(), inst.len())?;
    Ok(cycle_length(inst, &canonical_cycle(tour.order())))
}

/// Greedy tour from `start`: always move to the closest unvisited city,
/// ties going to the lowest index.
pub fn tsp_nearest_neighbor(inst: &TspInstance, start: usize) -> TourPermutation {
    let n = inst.len();
    assert!(start < n, "start city {start} out of range for {n} cities");
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    while order.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for next in (0..n).filter(|&c| !visited[c]) {
            let d = inst.dist(current, next);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((next, d));
            }
        }
        let (next, _) = best.expect("unvisited city remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    TourPermutation(order)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("exhaustive search supports at most {BRUTE_FORCE_MAX} cities, got {0}")]
pub struct TooLarge(pub usize);

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exact optimum by enumerating the (n-1)!/2 distinct cycles. The returned
/// tour is canonical (starts at 0, second city lower than the last); among
/// equal-length optima the lexicographically first wins.
pub fn tsp_brute_force(inst: &TspInstance) -> Result<(TourPermutation, f64), TooLarge> {
    let n = inst.len();
    if n > BRUTE_FORCE_MAX {
        return Err(TooLarge(n));
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut tour = vec![0; n];
    loop {
        if rest[0] < rest[rest.len() - 1] {
            tour[1..].copy_from_slice(&rest);
            let len = cycle_length(inst, &tour);
            if best.as_ref().is_none_or(|(_, b)| len < *b) {
                best = Some((tour.clone(), len));
            }
        }
        if !next_permutation(&mut rest) {
            break;
        }
    }
    let (order, len) = best.expect("at least one cycle");
    Ok((TourPermutation(order), len))
}

/// Axis-aligned sampling box for generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn unit() -> Self {
        Self { x_min: 0.0, y_min: 0.0, x_max: 1.0, y_max: 1.0 }
    }

    pub fn square(side: f64) -> Self {
        Self { x_min: 0.0, y_min: 0.0, x_max: side, y_max: side }
    }
}

/// `n` points drawn uniformly from `area`; a pure function of `seed`.
pub fn gen_tsp(seed: u64, n: usize, area: Rect) -> Result<TspInstance, InstanceError> {
    if n < 3 {
        return Err(InstanceError::new(format!("need at least 3 cities, got {n}")));
    }
    let finite = [area.x_min, area.x_max, area.y_min, area.y_max].iter().all(|v| v.is_finite());
    if !finite || area.x_min >= area.x_max || area.y_min >= area.y_max {
        return Err(InstanceError::new(format!("empty or non-finite sampling box {area:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(area.x_min..area.x_max),
                rng.gen_range(area.y_min..area.y_max),
            )
        })
        .collect();
    TspInstance::new(format!("tsp-{seed}-{n}"), points)
}

/// Uniformly random permutation of `0..n`.
pub fn random_tour<R: Rng + ?Sized>(rng: &mut R, n: usize) -> TourPermutation {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    TourPermutation(order)
}
