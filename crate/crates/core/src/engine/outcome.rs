use serde::Serialize;

use crate::attacks::{adversarial_drift, AttackSpec};
use crate::error::{Error, Result};
use crate::models::{check_lengths, network_divergence, AgentModel, Hypothesis};
use crate::topology::{Centrality, Network};

use super::trial::{average_belief, Trajectory};

/// Margins within this band of zero are reported as indeterminate.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;
pub const DEFAULT_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Wrong,
    True,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Wrong => "wrong",
            Verdict::True => "true",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Limit prediction when `true_state` generates the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatePrediction {
    pub true_state: Hypothesis,
    /// Centrality-weighted divergence of the normal agents.
    pub lhs: f64,
    /// Total adversarial pull toward the wrong state.
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// `(agent, u_ℓ · drift_ℓ)` per malicious agent.
    pub contributions: Vec<(usize, f64)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomePrediction {
    pub tol: f64,
    pub states: [StatePrediction; 2],
}

impl OutcomePrediction {
    pub fn state(&self, h: Hypothesis) -> &StatePrediction {
        &self.states[h.index()]
    }

    pub fn verdict(&self, h: Hypothesis) -> Verdict {
        self.state(h).verdict
    }

    pub fn margin(&self, h: Hypothesis) -> f64 {
        self.state(h).margin
    }

    pub fn margins(&self) -> [f64; 2] {
        [self.states[0].margin, self.states[1].margin]
    }
}

pub fn classify_limit(
    net: &Network,
    u: &Centrality,
    models: &[AgentModel],
    attack: &AttackSpec,
    tol: f64,
) -> Result<OutcomePrediction> {
    check_lengths(net, models)?;
    if u.len() != net.n_agents() || attack.n_agents() != net.n_agents() {
        return Err(Error::Contract(
            "centrality, attack and network sizes differ".into(),
        ));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Contract(format!("tolerance {tol} must be finite and nonnegative")));
    }
    let predict = |state: Hypothesis| -> Result<StatePrediction> {
        let lhs = network_divergence(net, u, models, state)?;
        let mut contributions = Vec::with_capacity(net.n_malicious());
        for k in (0..net.n_agents()).filter(|&k| net.is_malicious(k)) {
            let d = attack
                .distortion(k)
                .ok_or_else(|| Error::Contract(format!("malicious agent {k} has no distortion")))?;
            let drift = adversarial_drift(&models[k], &d.l1, &d.l2, state)?;
            contributions.push((k, u.get(k) * drift));
        }
        let rhs = contributions.iter().fold(0.0, |acc, (_, c)| acc + c);
        let margin = rhs - lhs;
        let verdict = if margin > tol {
            Verdict::Wrong
        } else if margin < -tol {
            Verdict::True
        } else {
            Verdict::Indeterminate
        };
        Ok(StatePrediction {
            true_state: state,
            lhs,
            rhs,
            margin,
            contributions,
            verdict,
        })
    };
    Ok(OutcomePrediction {
        tol,
        states: [predict(Hypothesis::Theta1)?, predict(Hypothesis::Theta2)?],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmpiricalOutcome {
    Wrong,
    True,
    Undecided,
}

impl EmpiricalOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            EmpiricalOutcome::Wrong => "wrong",
            EmpiricalOutcome::True => "true",
            EmpiricalOutcome::Undecided => "undecided",
        }
    }

    /// Whether a decided outcome matches a verdict; `None` if either side is
    /// undecided or indeterminate.
    pub fn agrees_with(self, v: Verdict) -> Option<bool> {
        match (self, v) {
            (EmpiricalOutcome::Undecided, _) | (_, Verdict::Indeterminate) => None,
            (EmpiricalOutcome::Wrong, Verdict::Wrong) | (EmpiricalOutcome::True, Verdict::True) => Some(true),
            _ => Some(false),
        }
    }
}

/// Looks at the average belief on the true state over the final `window`
/// rounds. Short trajectories are undecided.
pub fn detect_outcome(traj: &Trajectory, threshold: f64, window: usize) -> Result<EmpiricalOutcome> {
    if !(threshold > 0.0 && threshold < 0.5) {
        return Err(Error::Contract(format!("threshold {threshold} must lie in (0, 0.5)")));
    }
    if window == 0 {
        return Err(Error::Contract("window must be at least 1".into()));
    }
    if window > traj.iterations() {
        return Ok(EmpiricalOutcome::Undecided);
    }
    let avg = average_belief(traj, traj.true_state);
    let tail = &avg[avg.len() - window..];
    Ok(if tail.iter().all(|&v| v < threshold) {
        EmpiricalOutcome::Wrong
    } else if tail.iter().all(|&v| v > 1.0 - threshold) {
        EmpiricalOutcome::True
    } else {
        EmpiricalOutcome::Undecided
    })
}
