//! Observation models, divergences and relative-confidence coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Centrality, Network};

/// Masses must sum to one within this bound.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Two PMFs closer than this on every symbol count as equal.
pub const INFORMATIVE_TOL: f64 = 1e-15;

/// One of the two candidate states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Hypothesis {
    Theta1,
    Theta2,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::Theta1, Hypothesis::Theta2];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::Theta1 => 0,
            Hypothesis::Theta2 => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Hypothesis::Theta1 => Hypothesis::Theta2,
            Hypothesis::Theta2 => Hypothesis::Theta1,
        }
    }
}

impl TryFrom<u8> for Hypothesis {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Hypothesis::Theta1),
            2 => Ok(Hypothesis::Theta2),
            _ => Err(format!("hypothesis must be 1 or 2, got {v}")),
        }
    }
}

impl From<Hypothesis> for u8 {
    fn from(h: Hypothesis) -> u8 {
        h.index() as u8 + 1
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "theta{}", self.index() + 1)
    }
}

/// Probability mass function over a finite alphabet of at least two symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet size {} < 2",
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidPmf(format!("mass {m} is not a probability")));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!("masses sum to {sum}")));
        }
        Ok(Pmf(masses))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mass(&self, symbol: usize) -> f64 {
        self.0[symbol]
    }

    pub fn min_mass(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn support(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().map(|&m| m > 0.0)
    }
}

impl<'de> Deserialize<'de> for Pmf {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let masses = Vec::<f64>::deserialize(d)?;
        Pmf::new(masses).map_err(serde::de::Error::custom)
    }
}

/// True likelihoods of one agent under each hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentModel {
    l1: Pmf,
    l2: Pmf,
}

impl AgentModel {
    /// Requires equal alphabets and equal supports so both divergences are finite.
    pub fn new(l1: Pmf, l2: Pmf) -> Result<Self> {
        if l1.len() != l2.len() {
            return Err(Error::InvalidPmf(format!(
                "likelihoods have alphabet sizes {} and {}",
                l1.len(),
                l2.len()
            )));
        }
        if !l1.support().eq(l2.support()) {
            return Err(Error::InfiniteKl(
                "likelihoods under the two hypotheses have different supports".into(),
            ));
        }
        Ok(AgentModel { l1, l2 })
    }

    pub fn alphabet_size(&self) -> usize {
        self.l1.len()
    }

    pub fn likelihood(&self, h: Hypothesis) -> &Pmf {
        match h {
            Hypothesis::Theta1 => &self.l1,
            Hypothesis::Theta2 => &self.l2,
        }
    }

    pub fn l1(&self) -> &Pmf {
        &self.l1
    }

    pub fn l2(&self) -> &Pmf {
        &self.l2
    }
}

impl<'de> Deserialize<'de> for AgentModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            l1: Pmf,
            l2: Pmf,
        }
        let raw = Raw::deserialize(d)?;
        AgentModel::new(raw.l1, raw.l2).map_err(serde::de::Error::custom)
    }
}

/// Binary symmetric channel with crossover `1 - p`.
pub fn make_bsc(p: f64) -> Result<AgentModel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InfiniteKl(format!(
            "bsc parameter {p} must lie strictly inside (0, 1)"
        )));
    }
    AgentModel::new(Pmf::new(vec![p, 1.0 - p])?, Pmf::new(vec![1.0 - p, p])?)
}

/// `KL(p || q)` in nats.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidPmf("alphabet sizes differ".into()));
    }
    let mut total = 0.0;
    for (i, (&a, &b)) in p.masses().iter().zip(q.masses()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Err(Error::InfiniteKl(format!(
                "symbol {i} has mass {a} under p but 0 under q"
            )));
        }
        total += a * (a / b).ln();
    }
    // rounding can leave a tiny negative value for near-identical inputs
    Ok(total.max(0.0))
}

pub fn is_informative(m: &AgentModel) -> bool {
    m.l1
        .masses()
        .iter()
        .zip(m.l2.masses())
        .any(|(a, b)| (a - b).abs() > INFORMATIVE_TOL)
}

/// `S_j`: centrality-weighted divergence of the normal agents when `state` is true.
pub fn network_divergence(
    net: &Network,
    u: &Centrality,
    models: &[AgentModel],
    state: Hypothesis,
) -> Result<f64> {
    check_lengths(net, models)?;
    let mut s = 0.0;
    for (k, m) in models.iter().enumerate() {
        if net.is_malicious(k) {
            continue;
        }
        s += u.get(k) * kl_divergence(m.likelihood(state), m.likelihood(state.other()))?;
    }
    Ok(s)
}

pub(crate) fn check_lengths(net: &Network, models: &[AgentModel]) -> Result<()> {
    if models.len() != net.n_agents() {
        return Err(Error::Contract(format!(
            "{} models for {} agents",
            models.len(),
            net.n_agents()
        )));
    }
    Ok(())
}

/// Prior over the two states held by the adversaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 2]")]
pub struct Prior {
    pi1: f64,
    pi2: f64,
}

impl Prior {
    pub fn new(pi1: f64, pi2: f64) -> Result<Self> {
        if !(pi1 >= 0.0 && pi2 >= 0.0) || (pi1 + pi2 - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!(
                "prior ({pi1}, {pi2}) is not a distribution"
            )));
        }
        Ok(Prior { pi1, pi2 })
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn pi2(&self) -> f64 {
        self.pi2
    }
}

impl Default for Prior {
    fn default() -> Self {
        Prior { pi1: 0.5, pi2: 0.5 }
    }
}

impl From<Prior> for [f64; 2] {
    fn from(p: Prior) -> Self {
        [p.pi1, p.pi2]
    }
}

impl<'de> Deserialize<'de> for Prior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[f64; 2]>::deserialize(d)?;
        Prior::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// `Z(ζ) = π₁ L(ζ|θ₁) − π₂ L(ζ|θ₂)` per symbol.
pub fn relative_confidence(m: &AgentModel, prior: Prior) -> Vec<f64> {
    m.l1
        .masses()
        .iter()
        .zip(m.l2.masses())
        .map(|(a, b)| prior.pi1 * a - prior.pi2 * b)
        .collect()
}

/// Split of the alphabet by the sign of the relative confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidencePartition {
    pub z: Vec<f64>,
    /// Symbols with `Z >= 0`.
    pub d1: Vec<usize>,
    /// Symbols with `Z < 0`.
    pub d2: Vec<usize>,
}

impl ConfidencePartition {
    /// Symbols assigned to `D^j`.
    pub fn set(&self, h: Hypothesis) -> &[usize] {
        match h {
            Hypothesis::Theta1 => &self.d1,
            Hypothesis::Theta2 => &self.d2,
        }
    }

    pub fn is_mixed(&self) -> bool {
        !self.d1.is_empty() && !self.d2.is_empty()
    }
}

pub fn confidence_partition(z: &[f64]) -> ConfidencePartition {
    let (d1, d2) = (0..z.len()).partition(|&i| z[i] >= 0.0);
    ConfidencePartition {
        z: z.to_vec(),
        d1,
        d2,
    }
}
