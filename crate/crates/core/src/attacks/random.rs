use rand::Rng;
use rand_distr::Exp1;

use crate::error::Result;
use crate::models::{AgentModel, Pmf};

use super::{check_epsilon, Distortion, Regime};

/// Baseline strategy: each distorted PMF is uniform on the ε-floored simplex.
pub fn random_attack<R: Rng + ?Sized>(m: &AgentModel, epsilon: f64, rng: &mut R) -> Result<Distortion> {
    check_epsilon(epsilon, std::slice::from_ref(m))?;
    let n = m.alphabet_size();
    let l1 = floored_simplex_draw(n, epsilon, rng)?;
    let l2 = floored_simplex_draw(n, epsilon, rng)?;
    Ok(Distortion::new(l1, l2, Regime::Random))
}

fn floored_simplex_draw<R: Rng + ?Sized>(n: usize, epsilon: f64, rng: &mut R) -> Result<Pmf> {
    // normalized i.i.d. exponentials are uniform on the simplex
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let spare = 1.0 - n as f64 * epsilon;
    Pmf::new(draws.iter().map(|d| epsilon + spare * d / total).collect())
}
