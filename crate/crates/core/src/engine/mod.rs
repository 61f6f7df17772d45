//! Belief dynamics, limit classification and batched simulation.

pub mod belief;
pub mod monte_carlo;
pub mod outcome;
pub mod trial;

pub use belief::{adapt_step, combine_step, log_sum_exp, BeliefVector};
pub use monte_carlo::{run_monte_carlo, MonteCarloConfig, MonteCarloSummary, TrialResult};
pub use outcome::{
    classify_limit, detect_outcome, EmpiricalOutcome, OutcomePrediction, StatePrediction, Verdict,
    DEFAULT_CLASSIFY_TOL, DEFAULT_THRESHOLD, DEFAULT_WINDOW,
};
pub use trial::{attack_rng, average_belief, observation_rng, run_trial, run_trial_from, sample_observation, Trajectory};
