//! Distortions for an adversary that knows its centrality and both network
//! divergences `S₁`, `S₂`.
//!
//! The adversary works on a signal pair `(ζ¹, ζ²)` and puts ε on every other
//! symbol. In log-likelihood-ratio coordinates
//!
//! ```text
//! x₁ = ln(L̂(ζ¹|θ₂) / L̂(ζ¹|θ₁)),   x₂ = ln(L̂(ζ²|θ₂) / L̂(ζ²|θ₁))
//! ```
//!
//! the two misleading inequalities are half-planes
//!
//! ```text
//! u (L(ζ¹|θ₁) x₁ + L(ζ²|θ₁) x₂) >  S₁
//! u (L(ζ¹|θ₂) x₁ + L(ζ²|θ₂) x₂) < −S₂
//! ```
//!
//! whose boundaries meet at `(n₂/(u d), −n₁/(u d))`. The feasible cone opens
//! from that vertex along slopes between the two boundary slopes. We walk
//! rays from the vertex, keep the points whose masses stay within
//! `[ε, α − ε]`, and return the point with the largest smaller margin.
//!
//! Written with the signs of the published anchor, `(n₂/(u d), n₁/(u d))`,
//! the second coordinate does not sit on both boundaries; both are reported
//! in [`KnownDivergenceParams`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{is_informative, AgentModel, Pmf};

use super::{check_epsilon, misleads_both_states, Distortion, Regime};

/// Determinants with smaller magnitude count as zero.
const DETERMINANT_TOL: f64 = 1e-15;

/// Number of ray slopes tried besides the central one.
const SLOPE_GRID: usize = 40;

/// Linear samples per ray before bisection.
const RAY_SAMPLES: usize = 400;

/// Everything computed while synthesizing one adversary's distortion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownDivergenceParams {
    pub signal_pair: (usize, usize),
    pub n1: f64,
    pub n2: f64,
    pub d: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    /// Intersection of both boundary lines.
    pub vertex: (f64, f64),
    /// `(n₂/(u d), n₁/(u d))`, the anchor with both coordinates signed alike.
    pub unsigned_anchor: (f64, f64),
    pub slope_interval: (f64, f64),
    pub beta: f64,
    pub x1: f64,
    pub x2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub alpha: f64,
    pub margins: [f64; 2],
}

/// Symbol pair with the largest `|d|`, lowest indices on ties, and its `d`.
pub fn select_signal_pair(m: &AgentModel) -> Result<((usize, usize), f64)> {
    ranked_pairs(m)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Uninformative("no symbol pair separates the hypotheses".into()))
}

fn determinant(m: &AgentModel, first: usize, second: usize) -> f64 {
    let (l1, l2) = (m.l1(), m.l2());
    l2.mass(second) * l1.mass(first) - l1.mass(second) * l2.mass(first)
}

/// Pairs with non-zero determinant, by decreasing `|d|`.
fn ranked_pairs(m: &AgentModel) -> Vec<((usize, usize), f64)> {
    let n = m.alphabet_size();
    let mut pairs: Vec<((usize, usize), f64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), determinant(m, i, j)))
        .filter(|(_, d)| d.abs() > DETERMINANT_TOL)
        .collect();
    // stable sort keeps lexicographic order among equal magnitudes
    pairs.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    pairs
}

/// Solves `x₁ = ln(ε₁/(α−ε₂))`, `x₂ = ln((α−ε₁)/ε₂)` for the masses.
/// Returns `[ε₁, ε₂, α−ε₁, α−ε₂]`, or `None` when the coordinates do not
/// describe positive masses.
pub fn coordinates_to_masses(x1: f64, x2: f64, alpha: f64) -> Option<[f64; 4]> {
    let (a, b) = (x1.exp(), x2.exp());
    let denom = a - b;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let eps1 = a * alpha * (1.0 - b) / denom;
    let eps2 = alpha * (a - 1.0) / denom;
    let rest1 = alpha * b * (a - 1.0) / denom;
    let rest2 = alpha * (1.0 - b) / denom;
    let out = [eps1, eps2, rest1, rest2];
    out.iter().all(|v| v.is_finite() && *v > 0.0).then_some(out)
}

/// Distorted pair for coordinates `(x₁, x₂)` on `pair`, ε elsewhere.
pub fn pmfs_from_coordinates(
    alphabet_size: usize,
    pair: (usize, usize),
    x1: f64,
    x2: f64,
    epsilon: f64,
) -> Option<(Pmf, Pmf)> {
    let alpha = 1.0 - (alphabet_size as f64 - 2.0) * epsilon;
    let [eps1, eps2, rest1, rest2] = coordinates_to_masses(x1, x2, alpha)?;
    let mut l1 = vec![epsilon; alphabet_size];
    let mut l2 = vec![epsilon; alphabet_size];
    l1[pair.0] = rest2;
    l1[pair.1] = eps2;
    l2[pair.0] = eps1;
    l2[pair.1] = rest1;
    Some((Pmf::new(l1).ok()?, Pmf::new(l2).ok()?))
}

struct Geometry {
    pair: (usize, usize),
    d: f64,
    n1: f64,
    n2: f64,
    vertex: (f64, f64),
    /// Boundary slopes; `lo < hi < 0`.
    slopes: (f64, f64),
    /// `L(ζ¹|θ₁), L(ζ²|θ₁), L(ζ¹|θ₂), L(ζ²|θ₂)`.
    lik: [f64; 4],
    u: f64,
    s1: f64,
    s2: f64,
    alpha: f64,
    epsilon: f64,
    x_plus: f64,
}

impl Geometry {
    fn new(m: &AgentModel, pair: (usize, usize), d: f64, u: f64, s1: f64, s2: f64, epsilon: f64) -> Self {
        let (i, j) = pair;
        let lik = [m.l1().mass(i), m.l1().mass(j), m.l2().mass(i), m.l2().mass(j)];
        let n1 = lik[2] * s1 + lik[0] * s2;
        let n2 = lik[3] * s1 + lik[1] * s2;
        let vertex = (n2 / (u * d), -n1 / (u * d));
        let r1 = -lik[0] / lik[1];
        let r2 = -lik[2] / lik[3];
        let alpha = 1.0 - (m.alphabet_size() as f64 - 2.0) * epsilon;
        Geometry {
            pair,
            d,
            n1,
            n2,
            vertex,
            slopes: (r1.min(r2), r1.max(r2)),
            lik,
            u,
            s1,
            s2,
            alpha,
            epsilon,
            x_plus: ((alpha - epsilon) / epsilon).ln(),
        }
    }

    fn margins(&self, x: (f64, f64)) -> [f64; 2] {
        let [a11, a21, a12, a22] = self.lik;
        [
            self.u * (a11 * x.0 + a21 * x.1) - self.s1,
            -self.u * (a12 * x.0 + a22 * x.1) - self.s2,
        ]
    }

    fn masses_valid(&self, x: (f64, f64)) -> bool {
        let lo = self.epsilon;
        coordinates_to_masses(x.0, x.1, self.alpha)
            .is_some_and(|ms| ms.iter().all(|&v| v >= lo))
    }

    fn point(&self, beta: f64, t: f64) -> (f64, f64) {
        let s = self.d.signum();
        (self.vertex.0 + s * t, self.vertex.1 + s * beta * t)
    }

    /// Ray parameter where the ray leaves the open box `|x| < x⁺`.
    fn box_exit(&self, beta: f64) -> f64 {
        let s = self.d.signum();
        let exit = |start: f64, step: f64| {
            if step > 0.0 {
                (self.x_plus - start) / step
            } else {
                (self.x_plus + start) / -step
            }
        };
        exit(self.vertex.0, s).min(exit(self.vertex.1, s * beta))
    }

    /// Slope candidates: the geometric centre of the slope interval first,
    /// then a log-spaced sweep across its interior.
    fn slope_candidates(&self) -> Vec<f64> {
        let (lo, hi) = (self.slopes.0.abs(), self.slopes.1.abs());
        let mut out = vec![-(lo * hi).sqrt()];
        for q in 1..SLOPE_GRID {
            let frac = q as f64 / SLOPE_GRID as f64;
            out.push(-(lo.ln() + (hi.ln() - lo.ln()) * frac).exp());
        }
        out
    }

    /// Furthest point along the ray whose masses respect the floor.
    fn furthest_valid(&self, beta: f64) -> Option<f64> {
        let t_box = self.box_exit(beta);
        if !(t_box > 0.0) {
            return None;
        }
        let mut ts: Vec<f64> = (9..=40).rev().map(|k| t_box * 0.5f64.powi(k)).collect();
        ts.extend((1..RAY_SAMPLES).map(|i| t_box * i as f64 / RAY_SAMPLES as f64));
        let last = ts
            .iter()
            .rposition(|&t| self.masses_valid(self.point(beta, t)))?;
        let (mut good, mut bad) = (ts[last], ts.get(last + 1).copied().unwrap_or(t_box));
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if self.masses_valid(self.point(beta, mid)) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Some(good)
    }

    fn vertex_in_box(&self) -> bool {
        self.vertex.0.abs() < self.x_plus && self.vertex.1.abs() < self.x_plus
    }

    fn best_point(&self) -> Option<(f64, (f64, f64), [f64; 2])> {
        if !self.vertex_in_box() {
            return None;
        }
        let mut best: Option<(f64, (f64, f64), [f64; 2])> = None;
        for beta in self.slope_candidates() {
            let Some(t) = self.furthest_valid(beta) else {
                continue;
            };
            let x = self.point(beta, t);
            let margins = self.margins(x);
            let score = margins[0].min(margins[1]);
            if score <= 0.0 {
                continue;
            }
            if best.is_none_or(|(_, _, m)| score > m[0].min(m[1])) {
                best = Some((beta, x, margins));
            }
        }
        best
    }
}

/// Builds distortions that satisfy the per-agent misleading inequality
/// strictly for both states. Fails with [`Error::Infeasible`] when no point of
/// the feasible cone keeps every mass at or above `epsilon`.
pub fn known_divergence_attack(
    m: &AgentModel,
    u: f64,
    s1: f64,
    s2: f64,
    epsilon: f64,
) -> Result<Distortion> {
    check_epsilon(epsilon, std::slice::from_ref(m))?;
    if !is_informative(m) {
        return Err(Error::Uninformative(
            "known-divergence construction needs an informative model; use echo_attack".into(),
        ));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Contract(format!("centrality {u} outside (0, 1]")));
    }
    if !(s1 >= 0.0 && s2 >= 0.0 && s1.is_finite() && s2.is_finite()) {
        return Err(Error::Contract(format!(
            "network divergences ({s1}, {s2}) must be finite and non-negative"
        )));
    }
    let pairs = ranked_pairs(m);
    if pairs.is_empty() {
        return Err(Error::Uninformative("no symbol pair separates the hypotheses".into()));
    }

    let primary = Geometry::new(m, pairs[0].0, pairs[0].1, u, s1, s2, epsilon);
    for &(pair, d) in &pairs {
        let geo = Geometry::new(m, pair, d, u, s1, s2, epsilon);
        let Some((beta, x, margins)) = geo.best_point() else {
            continue;
        };
        if pair != primary.pair {
            log::info!("signal pair {:?} infeasible, using {:?}", primary.pair, pair);
        }
        let Some((l1, l2)) = pmfs_from_coordinates(m.alphabet_size(), pair, x.0, x.1, epsilon) else {
            continue;
        };
        let check = misleads_both_states(m, u, &l1, &l2, s1, s2)?;
        if !check.pass || l1.min_mass() < epsilon || l2.min_mass() < epsilon {
            continue;
        }
        let [eps1, eps2, ..] = coordinates_to_masses(x.0, x.1, geo.alpha).expect("validated above");
        let params = KnownDivergenceParams {
            signal_pair: pair,
            n1: geo.n1,
            n2: geo.n2,
            d,
            x_plus: geo.x_plus,
            x_minus: -geo.x_plus,
            vertex: geo.vertex,
            unsigned_anchor: (geo.n2 / (u * d), geo.n1 / (u * d)),
            slope_interval: geo.slopes,
            beta,
            x1: x.0,
            x2: x.1,
            eps1,
            eps2,
            alpha: geo.alpha,
            margins,
        };
        debug_assert!((params.margins[0] - check.margins[0]).abs() < 1e-6);
        return Ok(Distortion {
            known: Some(params),
            ..Distortion::new(l1, l2, Regime::KnownDivergence)
        });
    }

    let reach = primary.vertex.0.abs().max(primary.vertex.1.abs());
    let advised = (epsilon / 10.0).min((-(1.5 * reach + 2.0)).exp());
    Err(Error::Infeasible {
        reason: format!(
            "feasible cone vertex ({:.4}, {:.4}) leaves no distortion with masses >= {epsilon:e} (x+ = {:.4})",
            primary.vertex.0, primary.vertex.1, primary.x_plus
        ),
        advised_epsilon: advised,
    })
}
