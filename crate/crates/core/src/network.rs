//! Weighted social ties between consumers.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::space::ConsumerId;

/// Slack below the removal floor so that values such as 0.051 - 0.001 survive.
const FLOOR_SLACK: f64 = 1e-9;

const CONNECT_ATTEMPTS: usize = 100;

/// Undirected ties with strengths in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TieGraph {
    adj: Vec<BTreeMap<ConsumerId, f64>>,
    removal_floor: f64,
}

impl TieGraph {
    pub fn empty(n: usize, removal_floor: f64) -> Self {
        TieGraph {
            adj: vec![BTreeMap::new(); n],
            removal_floor,
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn removal_floor(&self) -> f64 {
        self.removal_floor
    }

    pub fn degree(&self, a: ConsumerId) -> usize {
        self.adj[a].len()
    }

    pub fn strength(&self, a: ConsumerId, b: ConsumerId) -> Option<f64> {
        self.adj[a].get(&b).copied()
    }

    pub fn neighbors(&self, a: ConsumerId) -> impl Iterator<Item = (ConsumerId, f64)> + '_ {
        self.adj[a].iter().map(|(&b, &s)| (b, s))
    }

    /// Mean strength of `a`'s ties; zero for an isolated node.
    pub fn mean_strength(&self, a: ConsumerId) -> f64 {
        let ties = &self.adj[a];
        if ties.is_empty() {
            0.0
        } else {
            ties.values().sum::<f64>() / ties.len() as f64
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    /// Edges as `(a, b, strength)` with `a < b`, in order.
    pub fn edges(&self) -> Vec<(ConsumerId, ConsumerId, f64)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ties)| {
                ties.iter()
                    .filter(move |(&b, _)| a < b)
                    .map(move |(&b, &s)| (a, b, s))
            })
            .collect()
    }

    fn set(&mut self, a: ConsumerId, b: ConsumerId, s: f64) {
        self.adj[a].insert(b, s);
        self.adj[b].insert(a, s);
    }

    /// Adds `delta` to the tie, creating it at `delta` if absent; clamps at 1.
    pub fn strengthen(&mut self, a: ConsumerId, b: ConsumerId, delta: f64) -> Result<()> {
        if a == b {
            return Err(Error::ContractViolation(format!("self-tie on {a}")));
        }
        let s = self.strength(a, b).map_or(delta, |s| s + delta).clamp(0.0, 1.0);
        self.set(a, b, s);
        Ok(())
    }

    /// Creates or overwrites a tie at a fixed strength.
    pub fn connect(&mut self, a: ConsumerId, b: ConsumerId, strength: f64) -> Result<()> {
        if a == b {
            return Err(Error::ContractViolation(format!("self-tie on {a}")));
        }
        self.set(a, b, strength.clamp(0.0, 1.0));
        Ok(())
    }

    /// Weakens every tie by `gamma` and drops those under the removal floor.
    pub fn decay_all(&mut self, gamma: f64) {
        let floor = self.removal_floor - FLOOR_SLACK;
        for ties in &mut self.adj {
            ties.retain(|_, s| {
                *s = (*s - gamma).max(0.0);
                *s >= floor
            });
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(a) = queue.pop_front() {
            for &b in self.adj[a].keys() {
                if !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Panics if symmetry, strength bounds or self-tie absence are broken.
    pub fn audit(&self) {
        for (a, ties) in self.adj.iter().enumerate() {
            for (&b, &s) in ties {
                assert_ne!(a, b, "self-tie on {a}");
                assert!((0.0..=1.0).contains(&s), "strength {s} on ({a}, {b})");
                assert_eq!(self.adj[b].get(&a), Some(&s), "asymmetric tie ({a}, {b})");
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallWorldParams {
    pub n: usize,
    pub degree: usize,
    pub rewire: f64,
    pub initial_strength: f64,
    pub removal_floor: f64,
}

/// Watts-Strogatz ring lattice with rewiring, regenerated until connected.
pub fn init_watts_strogatz<R: Rng + ?Sized>(params: &SmallWorldParams, rng: &mut R) -> Result<TieGraph> {
    let SmallWorldParams { n, degree: k, rewire: beta, .. } = *params;
    if k < 2 || k % 2 != 0 || n <= k || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Config(format!(
            "small-world network needs n > k >= 2, k even, 0 <= beta <= 1 (n={n}, k={k}, beta={beta})"
        )));
    }
    for _ in 0..CONNECT_ATTEMPTS {
        let g = watts_strogatz_once(params, rng);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Config(format!(
        "no connected small-world network in {CONNECT_ATTEMPTS} attempts (n={n}, k={k}, beta={beta})"
    )))
}

fn watts_strogatz_once<R: Rng + ?Sized>(params: &SmallWorldParams, rng: &mut R) -> TieGraph {
    let n = params.n;
    let mut g = TieGraph::empty(n, params.removal_floor);
    let s0 = params.initial_strength;
    for a in 0..n {
        for j in 1..=params.degree / 2 {
            g.set(a, (a + j) % n, s0);
        }
    }
    for j in 1..=params.degree / 2 {
        for a in 0..n {
            let b = (a + j) % n;
            if !rng.random_bool(params.rewire) {
                continue;
            }
            let candidates: Vec<ConsumerId> = (0..n)
                .filter(|&c| c != a && g.strength(a, c).is_none())
                .collect();
            if let Some(&c) = candidates.choose(rng) {
                g.adj[a].remove(&b);
                g.adj[b].remove(&a);
                g.set(a, c, s0);
            }
        }
    }
    g
}

/// Friend-of-friend introduction for `c`.
///
/// Picks the two-hop non-neighbour reached through the strongest product of
/// tie strengths (lowest id on ties); falls back to a uniformly random
/// non-neighbour. Returns the new friend, if any candidate exists.
pub fn referral<R: Rng + ?Sized>(
    g: &mut TieGraph,
    c: ConsumerId,
    strength: f64,
    rng: &mut R,
) -> Result<Option<ConsumerId>> {
    let mut best: Option<(ConsumerId, f64)> = None;
    for (a, s_ca) in g.neighbors(c) {
        for (b, s_ab) in g.neighbors(a) {
            if b == c || g.strength(c, b).is_some() {
                continue;
            }
            let score = s_ca * s_ab;
            let better = match best {
                None => true,
                Some((id, s)) => score > s || (score == s && b < id),
            };
            if better {
                best = Some((b, score));
            }
        }
    }
    let friend = match best {
        Some((b, _)) => Some(b),
        None => {
            let strangers: Vec<ConsumerId> = (0..g.len())
                .filter(|&b| b != c && g.strength(c, b).is_none())
                .collect();
            strangers.choose(rng).copied()
        }
    };
    if let Some(b) = friend {
        g.connect(c, b, strength)?;
    }
    Ok(friend)
}
