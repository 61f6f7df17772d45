//! Distorted likelihoods used by malicious agents in their adapt step.
//!
//! Every constructor returns a [`Distortion`]: the pair `(L̂₁, L̂₂)` plus the
//! regime that produced it and any ε-floor clamps applied on the way.

mod known;
mod random;
mod unknown;

pub use known::{
    coordinates_to_masses, known_divergence_attack, pmfs_from_coordinates, select_signal_pair,
    KnownDivergenceParams,
};
pub use random::random_attack;
pub use unknown::{asud_attack, mixed_confidence_attack, pure_confidence_attack};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_lengths, is_informative, network_divergence, AgentModel, Hypothesis, Pmf, Prior};
use crate::topology::{perron_eigenvector, Network, CENTRALITY_TOL};

/// Default ε floor for the unknown-divergence and random strategies.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Default ε floor for the known-divergence construction, which needs a smaller floor.
pub const DEFAULT_KNOWN_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackFamily {
    Honest,
    KnownDivergence,
    Asud,
    Random,
}

impl AttackFamily {
    pub fn default_epsilon(self) -> f64 {
        match self {
            AttackFamily::KnownDivergence => DEFAULT_KNOWN_EPSILON,
            _ => DEFAULT_EPSILON,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttackFamily::Honest => "honest",
            AttackFamily::KnownDivergence => "known_divergence",
            AttackFamily::Asud => "asud",
            AttackFamily::Random => "random",
        }
    }
}

/// Which construction produced a distortion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Honest,
    Echo,
    KnownDivergence,
    Mixed,
    Pure,
    Random,
}

/// Masses that were raised to the ε floor in one distorted PMF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampEvent {
    pub hypothesis: Hypothesis,
    pub symbols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distortion {
    pub l1: Pmf,
    pub l2: Pmf,
    pub regime: Regime,
    pub clamps: Vec<ClampEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known: Option<KnownDivergenceParams>,
}

impl Distortion {
    pub(crate) fn new(l1: Pmf, l2: Pmf, regime: Regime) -> Self {
        Distortion {
            l1,
            l2,
            regime,
            clamps: Vec::new(),
            known: None,
        }
    }

    pub fn likelihood(&self, h: Hypothesis) -> &Pmf {
        match h {
            Hypothesis::Theta1 => &self.l1,
            Hypothesis::Theta2 => &self.l2,
        }
    }
}

/// Materialized attack: one distortion per malicious agent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackSpec {
    pub family: AttackFamily,
    pub prior: Prior,
    pub epsilon: f64,
    distortions: Vec<Option<Distortion>>,
}

impl AttackSpec {
    /// Malicious agents keep their true likelihoods.
    pub fn honest(net: &Network, models: &[AgentModel]) -> Result<Self> {
        check_lengths(net, models)?;
        let distortions = models
            .iter()
            .enumerate()
            .map(|(k, m)| {
                net.is_malicious(k)
                    .then(|| Distortion::new(m.l1().clone(), m.l2().clone(), Regime::Honest))
            })
            .collect();
        Ok(AttackSpec {
            family: AttackFamily::Honest,
            prior: Prior::default(),
            epsilon: DEFAULT_EPSILON,
            distortions,
        })
    }

    /// Synthesizes distortions for every malicious agent. `rng` is only drawn
    /// from by the random family.
    pub fn materialize<R: Rng + ?Sized>(
        family: AttackFamily,
        prior: Prior,
        epsilon: f64,
        net: &Network,
        models: &[AgentModel],
        rng: &mut R,
    ) -> Result<Self> {
        check_lengths(net, models)?;
        check_epsilon(epsilon, models)?;
        if family == AttackFamily::Honest {
            let mut spec = Self::honest(net, models)?;
            spec.prior = prior;
            spec.epsilon = epsilon;
            return Ok(spec);
        }
        let divergences = if family == AttackFamily::KnownDivergence {
            let u = perron_eigenvector(net, CENTRALITY_TOL)?;
            let s1 = network_divergence(net, &u, models, Hypothesis::Theta1)?;
            let s2 = network_divergence(net, &u, models, Hypothesis::Theta2)?;
            Some((u, s1, s2))
        } else {
            None
        };

        let mut distortions = Vec::with_capacity(models.len());
        for (k, m) in models.iter().enumerate() {
            if !net.is_malicious(k) {
                distortions.push(None);
                continue;
            }
            let d = match family {
                AttackFamily::Honest => unreachable!(),
                AttackFamily::Asud => asud_attack(m, prior, epsilon)?,
                AttackFamily::Random => random_attack(m, epsilon, rng)?,
                AttackFamily::KnownDivergence => {
                    let (u, s1, s2) = divergences.as_ref().expect("computed above");
                    if is_informative(m) {
                        known_divergence_attack(m, u.get(k), *s1, *s2, epsilon)?
                    } else {
                        echo_attack(m)?
                    }
                }
            };
            for c in &d.clamps {
                log::info!(
                    "agent {k}: clamped symbols {:?} of L̂({}) to the epsilon floor",
                    c.symbols,
                    c.hypothesis
                );
            }
            distortions.push(Some(d));
        }
        Ok(AttackSpec {
            family,
            prior,
            epsilon,
            distortions,
        })
    }

    pub fn distortion(&self, k: usize) -> Option<&Distortion> {
        self.distortions.get(k).and_then(Option::as_ref)
    }

    pub fn distortions(&self) -> impl Iterator<Item = (usize, &Distortion)> {
        self.distortions
            .iter()
            .enumerate()
            .filter_map(|(k, d)| d.as_ref().map(|d| (k, d)))
    }

    pub fn n_agents(&self) -> usize {
        self.distortions.len()
    }

    pub fn clamp_count(&self) -> usize {
        self.distortions().map(|(_, d)| d.clamps.len()).sum()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} prior=({}, {}) epsilon={}",
            self.family.as_str(),
            self.prior.pi1(),
            self.prior.pi2(),
            self.epsilon
        )
    }
}

/// `0 < ε < min_k 1/|Z_k|`.
pub fn check_epsilon(epsilon: f64, models: &[AgentModel]) -> Result<()> {
    let largest = models.iter().map(AgentModel::alphabet_size).max().unwrap_or(2);
    if !(epsilon > 0.0 && epsilon < 1.0 / largest as f64) {
        return Err(Error::config(
            "attack.epsilon",
            format!(
                "epsilon violates the full-support floor: need 0 < epsilon < 1/{largest}, got {epsilon}"
            ),
        ));
    }
    Ok(())
}

/// Uninformative adversaries replay their true (common) PMF.
pub fn echo_attack(m: &AgentModel) -> Result<Distortion> {
    if is_informative(m) {
        return Err(Error::Contract(
            "echo attack only applies to uninformative models".into(),
        ));
    }
    Ok(Distortion::new(m.l1().clone(), m.l1().clone(), Regime::Echo))
}

/// Outcome of checking the per-agent misleading inequality for both states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisleadCheck {
    pub pass: bool,
    /// `u Σ L(ζ|θ_j) ln(L̂(ζ|θ_j')/L̂(ζ|θ_j)) − S_j` for `j = 1, 2`.
    pub margins: [f64; 2],
}

/// Expected log-ratio `Σ_ζ L(ζ|θ_j) ln(L̂(ζ|θ_j')/L̂(ζ|θ_j))` that an adversary
/// pushes toward the wrong state when `θ_j` is true.
pub fn adversarial_drift(m: &AgentModel, l1_hat: &Pmf, l2_hat: &Pmf, state: Hypothesis) -> Result<f64> {
    let (truth, wrong) = match state {
        Hypothesis::Theta1 => (l1_hat, l2_hat),
        Hypothesis::Theta2 => (l2_hat, l1_hat),
    };
    let true_pmf = m.likelihood(state);
    if truth.len() != true_pmf.len() || wrong.len() != true_pmf.len() {
        return Err(Error::Contract("distorted alphabet differs from model".into()));
    }
    let mut total = 0.0;
    for (i, &p) in true_pmf.masses().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (a, b) = (wrong.mass(i), truth.mass(i));
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Contract(format!(
                "distorted mass at symbol {i} is zero; the epsilon floor is violated"
            )));
        }
        total += p * (a / b).ln();
    }
    Ok(total)
}

pub fn misleads_both_states(
    m: &AgentModel,
    u: f64,
    l1_hat: &Pmf,
    l2_hat: &Pmf,
    s1: f64,
    s2: f64,
) -> Result<MisleadCheck> {
    let m1 = u * adversarial_drift(m, l1_hat, l2_hat, Hypothesis::Theta1)? - s1;
    let m2 = u * adversarial_drift(m, l1_hat, l2_hat, Hypothesis::Theta2)? - s2;
    Ok(MisleadCheck {
        pass: m1 > 0.0 && m2 > 0.0,
        margins: [m1, m2],
    })
}

/// Raises every mass below `epsilon` to the floor and rescales the rest so
/// the total stays one. Repeats until no mass is below the floor, which is
/// the water-filling optimum for a weighted log objective. Returns the
/// clamped symbols.
pub(crate) fn floor_and_renormalize(masses: &mut [f64], epsilon: f64) -> Vec<usize> {
    let n = masses.len();
    // masses already on the floor stay there without counting as clamps
    let mut fixed: Vec<bool> = masses.iter().map(|&m| m == epsilon).collect();
    let mut clamped = Vec::new();
    loop {
        let newly: Vec<usize> = (0..n)
            .filter(|&i| !fixed[i] && masses[i] < epsilon)
            .collect();
        if newly.is_empty() {
            break;
        }
        clamped.extend(&newly);
        for &i in &newly {
            fixed[i] = true;
            masses[i] = epsilon;
        }
        let n_fixed = fixed.iter().filter(|&&f| f).count();
        let target = 1.0 - n_fixed as f64 * epsilon;
        let free: f64 = (0..n).filter(|&i| !fixed[i]).map(|i| masses[i]).sum();
        let n_free = n - n_fixed;
        if n_free == 0 {
            break;
        }
        for i in (0..n).filter(|&i| !fixed[i]) {
            masses[i] = if free > 0.0 {
                masses[i] * target / free
            } else {
                target / n_free as f64
            };
        }
    }
    clamped.sort_unstable();
    clamped
}
