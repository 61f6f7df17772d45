use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attacks::AttackSpec;
use crate::error::{Error, Result};
use crate::models::{check_lengths, AgentModel, Hypothesis};
use crate::topology::Network;

use super::belief::{adapt_unchecked, combine_unchecked, BeliefVector};

/// Stream id for observation sampling; attack draws use [`ATTACK_STREAM`].
pub const OBSERVATION_STREAM: u64 = 0;
pub const ATTACK_STREAM: u64 = 1;

pub fn observation_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(OBSERVATION_STREAM);
    rng
}

pub fn attack_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ATTACK_STREAM);
    rng
}

/// Per-round, per-agent beliefs of one simulated trial. Row 0 holds the
/// initial beliefs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub beliefs: Vec<Vec<BeliefVector>>,
    pub true_state: Hypothesis,
    pub seed: u64,
    pub network_id: String,
    pub attack: String,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.beliefs.len().saturating_sub(1)
    }

    pub fn n_agents(&self) -> usize {
        self.beliefs.first().map_or(0, Vec::len)
    }

    pub fn final_beliefs(&self) -> &[BeliefVector] {
        self.beliefs.last().map_or(&[], Vec::as_slice)
    }
}

/// Inverse-CDF draw from the true likelihood of `true_state`.
pub fn sample_observation<R: Rng + ?Sized>(m: &AgentModel, true_state: Hypothesis, rng: &mut R) -> usize {
    let masses = m.likelihood(true_state).masses();
    let r: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (i, &p) in masses.iter().enumerate() {
        cumulative += p;
        if r < cumulative {
            return i;
        }
    }
    // r landed in the rounding gap above the last cumulative sum
    masses.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Log-likelihood tables used in the adapt step: true PMFs for normal agents,
/// distorted PMFs for malicious ones. `table[k][symbol] = (ln L(ζ|θ₁), ln L(ζ|θ₂))`.
fn update_tables(net: &Network, models: &[AgentModel], attack: &AttackSpec) -> Result<Vec<Vec<(f64, f64)>>> {
    if attack.n_agents() != net.n_agents() {
        return Err(Error::Contract(format!(
            "attack covers {} agents, network has {}",
            attack.n_agents(),
            net.n_agents()
        )));
    }
    (0..net.n_agents())
        .map(|k| {
            let m = &models[k];
            let (l1, l2) = if net.is_malicious(k) {
                let d = attack.distortion(k).ok_or_else(|| {
                    Error::Contract(format!("malicious agent {k} has no distortion"))
                })?;
                (&d.l1, &d.l2)
            } else {
                (m.l1(), m.l2())
            };
            if l1.len() != m.alphabet_size() || l2.len() != m.alphabet_size() {
                return Err(Error::Contract(format!("agent {k}: distorted alphabet size differs")));
            }
            Ok(l1
                .masses()
                .iter()
                .zip(l2.masses())
                .map(|(a, b)| (a.ln(), b.ln()))
                .collect())
        })
        .collect()
}

pub fn run_trial(
    net: &Network,
    models: &[AgentModel],
    attack: &AttackSpec,
    true_state: Hypothesis,
    iterations: usize,
    seed: u64,
) -> Result<Trajectory> {
    let initial = vec![BeliefVector::uniform(); net.n_agents()];
    run_trial_from(net, models, attack, &initial, true_state, iterations, seed)
}

/// One trial: every round each agent observes a symbol from its true model,
/// adapts with its (possibly distorted) likelihoods, then all agents combine
/// synchronously.
pub fn run_trial_from(
    net: &Network,
    models: &[AgentModel],
    attack: &AttackSpec,
    initial: &[BeliefVector],
    true_state: Hypothesis,
    iterations: usize,
    seed: u64,
) -> Result<Trajectory> {
    check_lengths(net, models)?;
    if iterations == 0 {
        return Err(Error::Contract("iteration budget must be at least 1".into()));
    }
    if initial.len() != net.n_agents() {
        return Err(Error::Contract(format!(
            "{} initial beliefs for {} agents",
            initial.len(),
            net.n_agents()
        )));
    }
    let tables = update_tables(net, models, attack)?;
    let n = net.n_agents();
    let mut rng = observation_rng(seed);
    let mut beliefs = Vec::with_capacity(iterations + 1);
    beliefs.push(initial.to_vec());
    let mut psi = vec![BeliefVector::uniform(); n];

    for _ in 0..iterations {
        let prev = beliefs.last().expect("row 0 pushed above");
        for k in 0..n {
            let symbol = sample_observation(&models[k], true_state, &mut rng);
            let (ll1, ll2) = tables[k][symbol];
            if !(ll1.is_finite() && ll2.is_finite()) {
                return Err(Error::DegenerateUpdate(format!(
                    "agent {k} observed symbol {symbol} with zero likelihood"
                )));
            }
            psi[k] = adapt_unchecked(&prev[k], ll1, ll2);
        }
        let next: Vec<BeliefVector> = (0..n)
            .map(|k| combine_unchecked(net.neighbors(k).iter().map(|&l| (&psi[l], net.weight(l, k)))))
            .collect();
        beliefs.push(next);
    }

    Ok(Trajectory {
        beliefs,
        true_state,
        seed,
        network_id: String::new(),
        attack: attack.describe(),
    })
}

/// Mean belief on `state` over all agents, per round.
pub fn average_belief(traj: &Trajectory, state: Hypothesis) -> Vec<f64> {
    traj.beliefs
        .iter()
        .map(|row| row.iter().map(|b| b.belief(state)).sum::<f64>() / row.len() as f64)
        .collect()
}
