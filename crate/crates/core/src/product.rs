//! Products: random six-vertex graphs, their circular-layout signatures and
//! topology-determined utility, plus landscape analysis over a set of types.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::space::GridLocation;
use crate::stats;

pub const VERTICES: usize = 6;
pub const MAX_EDGES: usize = VERTICES * (VERTICES - 1) / 2;
pub const MIN_EDGES: usize = VERTICES - 1;

/// Edge counts strictly above this yield positive utility.
pub const EXPECTED_EDGES: f64 = 8.0;

const TOPOLOGY_RETRY_LIMIT: usize = 10_000;

/// Vertex pairs in lexicographic order; bit `k` of a topology mask is edge `EDGE_PAIRS[k]`.
const EDGE_PAIRS: [(usize, usize); MAX_EDGES] = {
    let mut pairs = [(0, 0); MAX_EDGES];
    let mut k = 0;
    let mut a = 0;
    while a < VERTICES {
        let mut b = a + 1;
        while b < VERTICES {
            pairs[k] = (a, b);
            k += 1;
            b += 1;
        }
        a += 1;
    }
    pairs
};

fn pair_bit(a: usize, b: usize) -> Option<usize> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo == hi || hi >= VERTICES {
        return None;
    }
    EDGE_PAIRS.iter().position(|&p| p == (lo, hi))
}

/// A connected simple graph on six vertices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductTopology {
    mask: u16,
}

impl ProductTopology {
    pub fn from_edges(edges: &[(usize, usize)]) -> Result<Self> {
        let mut mask = 0u16;
        for &(a, b) in edges {
            let bit = pair_bit(a, b)
                .ok_or_else(|| Error::Domain(format!("invalid product edge ({a}, {b})")))?;
            mask |= 1 << bit;
        }
        Self::from_mask(mask)
    }

    pub fn from_mask(mask: u16) -> Result<Self> {
        if mask >> MAX_EDGES != 0 {
            return Err(Error::Domain(format!("edge mask {mask:#x} has bits beyond 15 edges")));
        }
        if !mask_connected(mask) {
            return Err(Error::Domain("product graph must be connected".into()));
        }
        Ok(ProductTopology { mask })
    }

    pub fn complete() -> Self {
        ProductTopology { mask: (1 << MAX_EDGES) - 1 }
    }

    /// Cycle visiting the vertices in index order.
    pub fn cycle() -> Self {
        let edges: Vec<_> = (0..VERTICES).map(|v| (v, (v + 1) % VERTICES)).collect();
        Self::from_edges(&edges).expect("cycle is connected")
    }

    /// Path through the given vertex order.
    pub fn path(order: [usize; VERTICES]) -> Result<Self> {
        let edges: Vec<_> = order.windows(2).map(|w| (w[0], w[1])).collect();
        Self::from_edges(&edges)
    }

    pub fn mask(&self) -> u16 {
        self.mask
    }

    pub fn edge_count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        pair_bit(a, b).is_some_and(|bit| self.mask & (1 << bit) != 0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        EDGE_PAIRS
            .iter()
            .enumerate()
            .filter(|(k, _)| self.mask & (1 << k) != 0)
            .map(|(_, &p)| p)
    }

    pub fn adjacency(&self) -> [[bool; VERTICES]; VERTICES] {
        let mut adj = [[false; VERTICES]; VERTICES];
        for (a, b) in self.edges() {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        adj
    }
}

impl fmt::Debug for ProductTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.edges()).finish()
    }
}

fn mask_connected(mask: u16) -> bool {
    let mut seen = 1u8;
    let mut frontier = 1u8;
    while frontier != 0 {
        let mut next = 0u8;
        for (k, &(a, b)) in EDGE_PAIRS.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            if frontier & (1 << a) != 0 {
                next |= 1 << b;
            }
            if frontier & (1 << b) != 0 {
                next |= 1 << a;
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == (1 << VERTICES) - 1
}

/// Draws a random connected product graph.
///
/// Each of the fifteen possible edges is present independently with
/// probability one half; disconnected draws are discarded. Connectivity on
/// six vertices already forces at least five edges.
pub fn random_topology<R: Rng + ?Sized>(rng: &mut R) -> Result<ProductTopology> {
    for _ in 0..TOPOLOGY_RETRY_LIMIT {
        let mask = rng.random::<u16>() & ((1 << MAX_EDGES) - 1);
        if mask_connected(mask) {
            return Ok(ProductTopology { mask });
        }
    }
    Err(Error::Internal(format!(
        "no connected product graph in {TOPOLOGY_RETRY_LIMIT} draws; random stream is broken"
    )))
}

/// Six non-negative layout distances, one per vertex in index order.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Signature(pub [f64; VERTICES]);

impl Signature {
    pub fn components(&self) -> &[f64; VERTICES] {
        &self.0
    }

    pub fn distance(&self, other: &Signature) -> f64 {
        valuation(self, other)
    }

    /// Componentwise mean of a non-empty collection.
    pub fn mean<'a>(sigs: impl IntoIterator<Item = &'a Signature>) -> Option<Signature> {
        let mut acc = [0.0; VERTICES];
        let mut n = 0usize;
        for s in sigs {
            for (a, v) in acc.iter_mut().zip(s.0) {
                *a += v;
            }
            n += 1;
        }
        if n == 0 {
            return None;
        }
        Some(Signature(acc.map(|a| a / n as f64)))
    }
}

/// Euclidean distance between an ideal and a product signature.
pub fn valuation(ideal: &Signature, sig: &Signature) -> f64 {
    ideal
        .0
        .iter()
        .zip(sig.0.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Parameters of the circular relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Angular separation (radians) below which vertex pairs are penalised.
    pub overlap_gap: f64,
    pub overlap_weight: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            step: 0.01,
            tolerance: 1e-8,
            max_iterations: 10_000,
            overlap_gap: 0.1,
            overlap_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub angles: [f64; VERTICES],
    pub signature: Signature,
    /// Standard deviation of edge chord lengths at the returned angles.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn initial_angles() -> [f64; VERTICES] {
    std::array::from_fn(|i| TAU * i as f64 / VERTICES as f64)
}

fn chord(delta: f64) -> f64 {
    2.0 * (0.5 * delta).sin().abs()
}

/// Signed angle difference wrapped into (-pi, pi].
fn wrap(delta: f64) -> f64 {
    let mut d = delta.rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

fn chord_lengths(angles: &[f64; VERTICES], topology: &ProductTopology) -> Vec<f64> {
    topology
        .edges()
        .map(|(a, b)| chord(angles[a] - angles[b]))
        .collect()
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Relaxation objective: variance of edge chord lengths plus the overlap penalty.
pub fn layout_objective(
    angles: &[f64; VERTICES],
    topology: &ProductTopology,
    params: &LayoutParams,
) -> f64 {
    objective_and_gradient(angles, &topology.edges().collect::<Vec<_>>(), params).0
}

/// Objective and its gradient from one pass over the edges.
fn objective_and_gradient(
    angles: &[f64; VERTICES],
    edges: &[(usize, usize)],
    params: &LayoutParams,
) -> (f64, [f64; VERTICES]) {
    let mut lengths = [0.0; MAX_EDGES];
    let mut slopes = [0.0; MAX_EDGES];
    for (k, &(a, b)) in edges.iter().enumerate() {
        let (sin, cos) = (0.5 * (angles[a] - angles[b])).sin_cos();
        lengths[k] = 2.0 * sin.abs();
        // d|2 sin(h)|/d(theta_a) = sign(sin h) cos h
        slopes[k] = sin.signum() * cos;
    }
    let lengths = &lengths[..edges.len()];
    let (mean, variance) = mean_and_variance(lengths);
    let mut grad = [0.0; VERTICES];
    let scale = 2.0 / edges.len() as f64;
    for (k, &(a, b)) in edges.iter().enumerate() {
        let g = scale * (lengths[k] - mean) * slopes[k];
        grad[a] += g;
        grad[b] -= g;
    }
    let mut penalty = 0.0;
    for &(a, b) in EDGE_PAIRS.iter() {
        let d = wrap(angles[a] - angles[b]);
        let sep = d.abs();
        if sep < params.overlap_gap {
            penalty += (params.overlap_gap - sep).powi(2);
            if sep > 0.0 {
                let g = -2.0 * params.overlap_weight * (params.overlap_gap - sep) * d.signum();
                grad[a] += g;
                grad[b] -= g;
            }
        }
    }
    (variance + params.overlap_weight * penalty, grad)
}

fn signature_from_angles(angles: &[f64; VERTICES]) -> Signature {
    let pts: [(f64, f64); VERTICES] = angles.map(|t| (t.cos(), t.sin()));
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / VERTICES as f64;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / VERTICES as f64;
    Signature(pts.map(|(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt()))
}

/// Relaxes the vertices of `topology` along the unit circle towards equal
/// edge lengths by fixed-step gradient descent from evenly spaced angles.
///
/// Returns the lowest-objective iterate seen. `converged` is false when the
/// iteration cap was reached before the largest angle update fell below
/// the tolerance.
pub fn relax_layout(topology: &ProductTopology, params: &LayoutParams) -> Layout {
    let edges: Vec<(usize, usize)> = topology.edges().collect();
    let mut angles = initial_angles();
    let (mut obj, mut grad) = objective_and_gradient(&angles, &edges, params);
    let mut best = angles;
    let mut best_obj = obj;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        let mut max_update = 0.0f64;
        for (t, g) in angles.iter_mut().zip(grad) {
            let update = params.step * g;
            *t -= update;
            max_update = max_update.max(update.abs());
        }
        iterations += 1;
        (obj, grad) = objective_and_gradient(&angles, &edges, params);
        if obj < best_obj {
            best_obj = obj;
            best = angles;
        }
        if max_update < params.tolerance {
            converged = true;
            break;
        }
    }
    let (_, variance) = mean_and_variance(&chord_lengths(&best, topology));
    Layout {
        angles: best,
        signature: signature_from_angles(&best),
        residual: variance.sqrt(),
        converged,
        iterations,
    }
}

pub fn layout_signature(topology: &ProductTopology) -> Signature {
    relax_layout(topology, &LayoutParams::default()).signature
}

/// Logistic utility centred on eight edges, rescaled to (-1, 1).
///
/// `2 / (1 + exp(-k (e - 8))) - 1` is evaluated as `tanh(k (e - 8) / 2)`,
/// which is the same function and exactly odd about eight edges.
pub fn utility_from_edges(edges: usize, slope: f64) -> Result<f64> {
    if !(MIN_EDGES..=MAX_EDGES).contains(&edges) {
        return Err(Error::Domain(format!(
            "edge count {edges} outside {MIN_EDGES}..={MAX_EDGES}"
        )));
    }
    Ok((0.5 * slope * (edges as f64 - EXPECTED_EDGES)).tanh())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductType {
    pub type_id: usize,
    pub topology: ProductTopology,
    pub signature: Signature,
    pub utility: f64,
}

impl ProductType {
    pub fn new(type_id: usize, topology: ProductTopology, slope: f64) -> Self {
        let utility = utility_from_edges(topology.edge_count(), slope)
            .expect("connected topology has an admissible edge count");
        ProductType {
            type_id,
            topology,
            signature: layout_signature(&topology),
            utility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductState {
    Available,
    BeingConsumed,
}

/// One placed replica of a product type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductInstance {
    pub id: usize,
    pub type_id: usize,
    pub location: GridLocation,
    pub state: ProductState,
}

/// Draws `n` product types whose signatures are pairwise at least `min_distance` apart.
pub fn generate_type_set<R: Rng + ?Sized>(
    n: usize,
    min_distance: f64,
    slope: f64,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Vec<ProductType>> {
    if n == 0 || !(min_distance >= 0.0) {
        return Err(Error::Domain(format!(
            "type set needs n >= 1 and min distance >= 0 (got n={n}, d={min_distance})"
        )));
    }
    let mut types: Vec<ProductType> = Vec::with_capacity(n);
    let mut attempts = 0;
    while types.len() < n {
        if attempts == max_attempts {
            return Err(Error::Generation {
                achieved: types.len(),
                requested: n,
                min_distance,
                attempts,
            });
        }
        attempts += 1;
        let candidate = ProductType::new(types.len(), random_topology(rng)?, slope);
        if types
            .iter()
            .all(|t| t.signature.distance(&candidate.signature) >= min_distance)
        {
            types.push(candidate);
        }
    }
    Ok(types)
}

/// A point of a utility landscape over signature space.
pub trait LandscapePoint {
    fn id(&self) -> usize;
    fn signature(&self) -> &Signature;
    fn utility(&self) -> f64;
}

impl LandscapePoint for ProductType {
    fn id(&self) -> usize {
        self.type_id
    }
    fn signature(&self) -> &Signature {
        &self.signature
    }
    fn utility(&self) -> f64 {
        self.utility
    }
}

/// A type as stored in a type-set file: everything but the topology itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeRecord {
    pub type_id: usize,
    pub edge_count: usize,
    pub utility: f64,
    pub signature: Signature,
}

impl From<&ProductType> for TypeRecord {
    fn from(t: &ProductType) -> Self {
        TypeRecord {
            type_id: t.type_id,
            edge_count: t.topology.edge_count(),
            utility: t.utility,
            signature: t.signature,
        }
    }
}

impl LandscapePoint for TypeRecord {
    fn id(&self) -> usize {
        self.type_id
    }
    fn signature(&self) -> &Signature {
        &self.signature
    }
    fn utility(&self) -> f64 {
        self.utility
    }
}

/// Mean distance from each type to its nearest other type; `None` for fewer than two types.
pub fn mean_nearest_neighbor_distance<T: LandscapePoint>(types: &[T]) -> Option<f64> {
    if types.len() < 2 {
        return None;
    }
    let total: f64 = types
        .iter()
        .map(|t| {
            types
                .iter()
                .filter(|o| o.id() != t.id())
                .map(|o| t.signature().distance(o.signature()))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Some(total / types.len() as f64)
}

/// Radius used to decide local maxima when none is given.
pub fn default_maxima_radius<T: LandscapePoint>(types: &[T]) -> f64 {
    mean_nearest_neighbor_distance(types)
        .filter(|r| *r > 0.0)
        .unwrap_or(f64::MIN_POSITIVE)
}

/// Ids of the types that no other type within `radius` beats on utility.
pub fn identify_maxima<T: LandscapePoint>(types: &[T], radius: f64) -> Result<Vec<usize>> {
    if types.is_empty() || !(radius > 0.0) {
        return Err(Error::Domain(
            "maxima need a non-empty type set and a positive radius".into(),
        ));
    }
    Ok(types
        .iter()
        .filter(|t| {
            !types.iter().any(|o| {
                o.id() != t.id()
                    && o.utility() > t.utility()
                    && t.signature().distance(o.signature()) <= radius
            })
        })
        .map(|t| t.id())
        .collect())
}

pub fn nearest_max_distance<T: LandscapePoint>(t: &T, maxima: &[&T]) -> Result<f64> {
    if maxima.is_empty() {
        return Err(Error::Domain("nearest maximum over an empty set".into()));
    }
    if maxima.iter().any(|m| m.id() == t.id()) {
        return Ok(0.0);
    }
    Ok(maxima
        .iter()
        .map(|m| t.signature().distance(m.signature()))
        .fold(f64::INFINITY, f64::min))
}

/// Per-type utilities and distances to the nearest maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub radius: f64,
    pub maxima: Vec<usize>,
    pub utilities: Vec<f64>,
    pub distances: Vec<f64>,
}

impl Landscape {
    pub fn analyze<T: LandscapePoint>(types: &[T], radius: Option<f64>) -> Result<Self> {
        let radius = radius.unwrap_or_else(|| default_maxima_radius(types));
        let maxima = identify_maxima(types, radius)?;
        let max_types: Vec<&T> = types.iter().filter(|t| maxima.contains(&t.id())).collect();
        let distances = types
            .iter()
            .map(|t| nearest_max_distance(t, &max_types))
            .collect::<Result<Vec<_>>>()?;
        Ok(Landscape {
            radius,
            maxima,
            utilities: types.iter().map(|t| t.utility()).collect(),
            distances,
        })
    }

    pub fn fdc(&self) -> Result<f64> {
        stats::fdc(&self.utilities, &self.distances)
    }
}
