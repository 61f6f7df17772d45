//! Log-domain belief vectors and the two per-round update steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::Hypothesis;

/// Combination weights must sum to one within this bound.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Belief over `{θ₁, θ₂}` stored as normalized log-probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeliefVector {
    log: [f64; 2],
}

impl BeliefVector {
    pub fn uniform() -> Self {
        BeliefVector {
            log: [0.5f64.ln(); 2],
        }
    }

    pub fn from_probs(b1: f64, b2: f64) -> Result<Self> {
        if !(b1 > 0.0 && b2 > 0.0 && b1.is_finite() && b2.is_finite()) {
            return Err(Error::Contract(format!(
                "initial beliefs ({b1}, {b2}) must be strictly positive"
            )));
        }
        Ok(Self::from_unnormalized_log([b1.ln(), b2.ln()]))
    }

    /// Normalizes arbitrary finite log-weights.
    pub fn from_unnormalized_log(log: [f64; 2]) -> Self {
        let lse = log_sum_exp(log);
        BeliefVector {
            log: [log[0] - lse, log[1] - lse],
        }
    }

    pub fn log_belief(&self, h: Hypothesis) -> f64 {
        self.log[h.index()]
    }

    pub fn belief(&self, h: Hypothesis) -> f64 {
        self.log[h.index()].exp()
    }

    pub fn probs(&self) -> [f64; 2] {
        [self.log[0].exp(), self.log[1].exp()]
    }

    pub fn logs(&self) -> [f64; 2] {
        self.log
    }
}

pub fn log_sum_exp(v: [f64; 2]) -> f64 {
    let hi = v[0].max(v[1]);
    let lo = v[0].min(v[1]);
    hi + (lo - hi).exp().ln_1p()
}

/// Local Bayes update with the likelihoods of the observed symbol.
pub fn adapt_step(belief: &BeliefVector, likelihood_at_obs: (f64, f64)) -> Result<BeliefVector> {
    let (l1, l2) = likelihood_at_obs;
    if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
        return Err(Error::DegenerateUpdate(format!(
            "likelihoods ({l1}, {l2}) at the observed symbol must be positive"
        )));
    }
    Ok(adapt_unchecked(belief, l1.ln(), l2.ln()))
}

#[inline]
pub(crate) fn adapt_unchecked(belief: &BeliefVector, log_l1: f64, log_l2: f64) -> BeliefVector {
    BeliefVector::from_unnormalized_log([belief.log[0] + log_l1, belief.log[1] + log_l2])
}

/// Weighted geometric pooling of neighbor intermediates.
pub fn combine_step(neighbor_intermediates: &[(BeliefVector, f64)]) -> Result<BeliefVector> {
    if neighbor_intermediates.is_empty() {
        return Err(Error::Contract("combine step needs at least one neighbor".into()));
    }
    if let Some((_, w)) = neighbor_intermediates.iter().find(|(_, w)| !(*w > 0.0)) {
        return Err(Error::Contract(format!("combination weight {w} is not positive")));
    }
    let total: f64 = neighbor_intermediates.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Contract(format!("combination weights sum to {total}")));
    }
    Ok(combine_unchecked(
        neighbor_intermediates.iter().map(|(b, w)| (b, *w)),
    ))
}

#[inline]
pub(crate) fn combine_unchecked<'a>(items: impl Iterator<Item = (&'a BeliefVector, f64)>) -> BeliefVector {
    let mut acc = [0.0f64; 2];
    for (b, w) in items {
        acc[0] += w * b.log[0];
        acc[1] += w * b.log[1];
    }
    BeliefVector::from_unnormalized_log(acc)
}
