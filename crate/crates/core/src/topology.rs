//! Agent networks: roles, combination weights and Perron centralities.
//!
//! Weights follow the column convention: `weight(l, k)` is the trust agent `k`
//! places on neighbor `l`, so every column sums to one.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column sums must match one within this bound.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// Power iteration stops once successive iterates differ by less than this.
pub const CENTRALITY_TOL: f64 = 1e-12;

pub const CENTRALITY_MAX_ITER: usize = 100_000;

/// Rejection-sampling cap for [`random_topology`].
pub const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Normal,
    Malicious,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Normal => "normal",
            Role::Malicious => "malicious",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    roles: Vec<Role>,
    /// Row-major `n x n`; entry `(l, k)` is `a_{lk}`.
    weights: Vec<f64>,
    /// `in_neighbors[k]` lists every `l` with `a_{lk} > 0`, ascending.
    in_neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network where each agent spreads its trust uniformly over its
    /// neighbor set. `adjacency[k]` is the neighbor set of `k`; it must be
    /// symmetric and should contain `k` itself.
    pub fn uniform(adjacency: &[Vec<usize>], roles: Vec<Role>) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::InvalidTopology("network has no agents".into()));
        }
        if roles.len() != n {
            return Err(Error::InvalidTopology(format!(
                "{} roles given for {} agents",
                roles.len(),
                n
            )));
        }
        let mut member = vec![false; n * n];
        for (k, neighbors) in adjacency.iter().enumerate() {
            if neighbors.is_empty() {
                return Err(Error::InvalidTopology(format!(
                    "agent {k} has an empty neighbor set"
                )));
            }
            for &l in neighbors {
                if l >= n {
                    return Err(Error::InvalidTopology(format!(
                        "agent {k} lists neighbor {l} outside 0..{n}"
                    )));
                }
                member[l * n + k] = true;
            }
        }
        for l in 0..n {
            for k in (l + 1)..n {
                if member[l * n + k] != member[k * n + l] {
                    return Err(Error::InvalidTopology(format!(
                        "adjacency is not symmetric between agents {l} and {k}"
                    )));
                }
            }
        }
        if !(0..n).any(|k| member[k * n + k]) {
            return Err(Error::InvalidTopology("no agent has a self-loop".into()));
        }

        let mut weights = vec![0.0; n * n];
        for k in 0..n {
            let degree = (0..n).filter(|&l| member[l * n + k]).count();
            let w = 1.0 / degree as f64;
            for l in 0..n {
                if member[l * n + k] {
                    weights[l * n + k] = w;
                }
            }
        }
        Ok(Self::from_parts(roles, weights))
    }

    /// Builds a network from an explicit combination matrix (`matrix[l][k] = a_{lk}`).
    pub fn from_matrix(matrix: &[Vec<f64>], roles: Vec<Role>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidTopology("network has no agents".into()));
        }
        if roles.len() != n {
            return Err(Error::InvalidTopology(format!(
                "{} roles given for {} agents",
                roles.len(),
                n
            )));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (l, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTopology(format!(
                    "row {l} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (k, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 || w > 1.0 {
                    return Err(Error::InvalidTopology(format!(
                        "weight ({l},{k}) = {w} outside [0, 1]"
                    )));
                }
            }
            weights.extend_from_slice(row);
        }
        for k in 0..n {
            let sum: f64 = (0..n).map(|l| weights[l * n + k]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidTopology(format!(
                    "column {k} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self::from_parts(roles, weights))
    }

    fn from_parts(roles: Vec<Role>, weights: Vec<f64>) -> Self {
        let n = roles.len();
        let in_neighbors = (0..n)
            .map(|k| (0..n).filter(|&l| weights[l * n + k] > 0.0).collect())
            .collect();
        Network {
            roles,
            weights,
            in_neighbors,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, k: usize) -> Role {
        self.roles[k]
    }

    pub fn is_malicious(&self, k: usize) -> bool {
        self.roles[k] == Role::Malicious
    }

    pub fn n_malicious(&self) -> usize {
        self.roles.iter().filter(|&&r| r == Role::Malicious).count()
    }

    /// `a_{lk}`: weight agent `k` assigns to neighbor `l`.
    pub fn weight(&self, l: usize, k: usize) -> f64 {
        self.weights[l * self.n_agents() + k]
    }

    /// Agents `l` with `a_{lk} > 0`, self included when `a_{kk} > 0`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.in_neighbors[k]
    }

    pub fn has_edge(&self, l: usize, k: usize) -> bool {
        self.weight(l, k) > 0.0
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_agents();
        self.weights.chunks(n).map(<[f64]>::to_vec).collect()
    }

    /// `A x` with `A` the combination matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_agents();
        self.weights
            .chunks(n)
            .map(|row| row.iter().zip(x).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// Irreducible positive-weight graph with at least one self-loop.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n_agents();
        if !(0..n).any(|k| self.weight(k, k) > 0.0) {
            return false;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in 0..n {
                    let edge = if forward {
                        self.weight(v, w) > 0.0
                    } else {
                        self.weight(w, v) > 0.0
                    };
                    if edge && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// Positive, normalized fixed point of the combination matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Centrality(Vec<f64>);

impl Centrality {
    /// Wraps raw per-agent weights without checking the fixed-point property.
    #[cfg(test)]
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Centrality(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total centrality carried by agents with the given role.
    pub fn mass(&self, net: &Network, role: Role) -> f64 {
        self.0
            .iter()
            .zip(net.roles())
            .filter(|(_, &r)| r == role)
            .fold(0.0, |acc, (u, _)| acc + u)
    }
}

/// Perron eigenvector of the combination matrix by power iteration from the
/// uniform vector, L1-renormalized every step.
pub fn perron_eigenvector(net: &Network, tol: f64) -> Result<Centrality> {
    if !net.is_strongly_connected() {
        return Err(Error::InvalidTopology(
            "centrality requires a strongly connected network".into(),
        ));
    }
    let n = net.n_agents();
    let mut u = vec![1.0 / n as f64; n];
    let mut diff = f64::INFINITY;
    for _ in 0..CENTRALITY_MAX_ITER {
        let mut next = net.apply(&u);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        diff = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u = next;
        if diff < tol {
            return Ok(Centrality(u));
        }
    }
    Err(Error::NoConvergence {
        iterations: CENTRALITY_MAX_ITER,
        residual: diff,
    })
}

/// Erdős–Rényi graph with self-loops on every agent, redrawn until connected.
/// Malicious roles go to the first `n_malicious` indices of a seeded shuffle.
pub fn random_topology(n: usize, n_malicious: usize, edge_prob: f64, seed: u64) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidTopology("network has no agents".into()));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidTopology(format!(
            "edge probability {edge_prob} outside (0, 1]"
        )));
    }
    if n_malicious >= n {
        return Err(Error::InvalidTopology(format!(
            "{n_malicious} malicious agents leave no normal agent among {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REDRAWS {
        let mut adjacency: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
        for l in 0..n {
            for k in (l + 1)..n {
                if rng.gen::<f64>() < edge_prob {
                    adjacency[l].push(k);
                    adjacency[k].push(l);
                }
            }
        }
        let net = Network::uniform(&adjacency, vec![Role::Normal; n])?;
        if !net.is_strongly_connected() {
            continue;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut roles = vec![Role::Normal; n];
        for &k in &order[..n_malicious] {
            roles[k] = Role::Malicious;
        }
        return Network::uniform(&adjacency, roles);
    }
    Err(Error::Generation(format!(
        "no strongly connected draw in {MAX_REDRAWS} attempts (n={n}, p={edge_prob})"
    )))
}

/// Star with hub at index 0, self-loops everywhere and uniform weights.
pub fn star_topology(n: usize, hub_is_malicious: bool, n_malicious: usize) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidTopology("star needs at least 2 agents".into()));
    }
    if n_malicious >= n {
        return Err(Error::InvalidTopology(format!(
            "{n_malicious} malicious agents leave no normal agent among {n}"
        )));
    }
    if hub_is_malicious && n_malicious == 0 {
        return Err(Error::InvalidTopology(
            "malicious hub requires n_malicious >= 1".into(),
        ));
    }
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(n);
    adjacency.push((0..n).collect());
    for k in 1..n {
        adjacency.push(vec![0, k]);
    }
    let mut roles = vec![Role::Normal; n];
    if hub_is_malicious {
        roles[..n_malicious].fill(Role::Malicious);
    } else {
        roles[1..=n_malicious].fill(Role::Malicious);
    }
    Network::uniform(&adjacency, roles)
}

/// Complete graph with self-loops; malicious roles on the lowest indices.
/// The uniform weights make the matrix doubly stochastic.
pub fn complete_topology(n: usize, n_malicious: usize) -> Result<Network> {
    if n == 0 || n_malicious >= n {
        return Err(Error::InvalidTopology(format!(
            "complete graph needs n > n_malicious (got n={n}, n_malicious={n_malicious})"
        )));
    }
    let adjacency: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
    let mut roles = vec![Role::Normal; n];
    roles[..n_malicious].fill(Role::Malicious);
    Network::uniform(&adjacency, roles)
}
