//! Closed-form distortions for adversaries that know only their own model and
//! a prior over the states. Each side of the per-agent problem
//!
//! ```text
//! min_{L̂₁} Σ Z(ζ) ln L̂₁(ζ)   and   max_{L̂₂} Σ Z(ζ) ln L̂₂(ζ),   L̂ⱼ(ζ) ≥ ε
//! ```
//!
//! is solved separately from the sign pattern of the relative confidence `Z`.

use crate::error::{Error, Result};
use crate::models::{confidence_partition, relative_confidence, AgentModel, ConfidencePartition, Hypothesis, Pmf, Prior};

use super::{check_epsilon, floor_and_renormalize, ClampEvent, Distortion, Regime};

/// Both `D¹` and `D²` non-empty: floor mass on `Dʲ`, the rest proportional to
/// `|Z|` on the complement.
pub fn mixed_confidence_attack(m: &AgentModel, prior: Prior, epsilon: f64) -> Result<Distortion> {
    check_epsilon(epsilon, std::slice::from_ref(m))?;
    let part = confidence_partition(&relative_confidence(m, prior));
    if !part.is_mixed() {
        return Err(Error::WrongRegime(
            "mixed confidence needs both confidence sets non-empty; use pure_confidence_attack"
                .into(),
        ));
    }
    let mut clamps = Vec::new();
    let mut build = |h: Hypothesis| -> Result<Pmf> {
        let n = part.z.len();
        let in_set = part.set(h);
        let complement: Vec<usize> = (0..n).filter(|i| !in_set.contains(i)).collect();
        let budget = 1.0 - in_set.len() as f64 * epsilon;
        let mut masses = vec![epsilon; n];
        proportional_fill(&mut masses, &part.z, &complement, budget);
        finish(masses, epsilon, h, &mut clamps)
    };
    let l1 = build(Hypothesis::Theta1)?;
    let l2 = build(Hypothesis::Theta2)?;
    Ok(Distortion {
        clamps,
        ..Distortion::new(l1, l2, Regime::Mixed)
    })
}

/// One confidence set is empty. The state whose set covers the alphabet puts
/// all spare mass on the symbol least indicative of it; the other state is
/// proportional to `|Z|`.
pub fn pure_confidence_attack(m: &AgentModel, prior: Prior, epsilon: f64) -> Result<Distortion> {
    check_epsilon(epsilon, std::slice::from_ref(m))?;
    let part = confidence_partition(&relative_confidence(m, prior));
    if part.is_mixed() {
        return Err(Error::WrongRegime(
            "pure confidence needs an empty confidence set; use mixed_confidence_attack".into(),
        ));
    }
    let n = part.z.len();
    let full = if part.d2.is_empty() {
        Hypothesis::Theta1
    } else {
        Hypothesis::Theta2
    };
    let mut clamps = Vec::new();

    let anchor = least_confident_symbol(&part, full);
    let mut concentrated = vec![epsilon; n];
    concentrated[anchor] = 1.0 - (n as f64 - 1.0) * epsilon;
    let concentrated = finish(concentrated, epsilon, full, &mut clamps)?;

    let mut spread = vec![0.0; n];
    let all: Vec<usize> = (0..n).collect();
    proportional_fill(&mut spread, &part.z, &all, 1.0);
    let spread = finish(spread, epsilon, full.other(), &mut clamps)?;

    let (l1, l2) = match full {
        Hypothesis::Theta1 => (concentrated, spread),
        Hypothesis::Theta2 => (spread, concentrated),
    };
    Ok(Distortion {
        clamps,
        ..Distortion::new(l1, l2, Regime::Pure)
    })
}

/// Dispatches on the confidence partition.
pub fn asud_attack(m: &AgentModel, prior: Prior, epsilon: f64) -> Result<Distortion> {
    let part = confidence_partition(&relative_confidence(m, prior));
    if part.is_mixed() {
        mixed_confidence_attack(m, prior, epsilon)
    } else {
        pure_confidence_attack(m, prior, epsilon)
    }
}

/// Symbol with the smallest `Z` when every `Z ≥ 0` (`full = θ₁`), or the
/// smallest `|Z|` when every `Z < 0` (`full = θ₂`). Ties go to the lowest index.
fn least_confident_symbol(part: &ConfidencePartition, full: Hypothesis) -> usize {
    let sign = match full {
        Hypothesis::Theta1 => 1.0,
        Hypothesis::Theta2 => -1.0,
    };
    let mut best = 0;
    for i in 1..part.z.len() {
        if sign * part.z[i] < sign * part.z[best] {
            best = i;
        }
    }
    best
}

/// Spreads `budget` over `symbols` in proportion to `|Z|`; uniformly when all
/// of those coefficients vanish.
fn proportional_fill(masses: &mut [f64], z: &[f64], symbols: &[usize], budget: f64) {
    let total: f64 = symbols.iter().map(|&i| z[i].abs()).sum();
    for &i in symbols {
        masses[i] = if total > 0.0 {
            z[i].abs() * budget / total
        } else {
            budget / symbols.len() as f64
        };
    }
}

fn finish(mut masses: Vec<f64>, epsilon: f64, h: Hypothesis, clamps: &mut Vec<ClampEvent>) -> Result<Pmf> {
    let clamped = floor_and_renormalize(&mut masses, epsilon);
    if !clamped.is_empty() {
        clamps.push(ClampEvent {
            hypothesis: h,
            symbols: clamped,
        });
    }
    Pmf::new(masses)
}
