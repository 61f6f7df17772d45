use rayon::prelude::*;
use serde::Serialize;

use crate::attacks::{AttackFamily, AttackSpec};
use crate::error::{Error, Result};
use crate::models::{check_lengths, AgentModel, Hypothesis, Prior};
use crate::topology::{perron_eigenvector, Network, CENTRALITY_TOL};

use super::belief::BeliefVector;
use super::outcome::{
    classify_limit, detect_outcome, EmpiricalOutcome, OutcomePrediction, Verdict, DEFAULT_CLASSIFY_TOL,
};
use super::trial::{attack_rng, average_belief, run_trial_from, Trajectory};

/// Everything a batch of trials needs.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub net: Network,
    pub models: Vec<AgentModel>,
    pub family: AttackFamily,
    pub prior: Prior,
    pub epsilon: f64,
    pub true_state: Hypothesis,
    pub iterations: usize,
    pub base_seed: u64,
    pub threshold: f64,
    pub window: usize,
    /// Uniform when `None`.
    pub initial: Option<Vec<BeliefVector>>,
    /// Keep full per-agent trajectories in the summary.
    pub keep_trajectories: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub outcome: EmpiricalOutcome,
    pub predicted: Verdict,
    pub margin: f64,
    pub final_average: f64,
    pub clamp_count: usize,
    #[serde(skip)]
    pub attack: AttackSpec,
    #[serde(skip)]
    pub average: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl TrialResult {
    pub fn agrees(&self) -> Option<bool> {
        self.outcome.agrees_with(self.predicted)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub true_state: Hypothesis,
    pub trials: Vec<TrialResult>,
    /// Prediction for the shared attack; `None` for per-trial random draws.
    pub prediction: Option<OutcomePrediction>,
    /// Fraction of decided trials whose outcome matches the prediction;
    /// `None` when no trial was decided.
    pub agreement_rate: Option<f64>,
    pub decided: usize,
    /// Mean over trials of the average belief on the true state, per round.
    pub mean_trajectory: Vec<f64>,
}

impl MonteCarloSummary {
    pub fn count(&self, outcome: EmpiricalOutcome) -> usize {
        self.trials.iter().filter(|t| t.outcome == outcome).count()
    }
}

/// Runs `trials` independent trials; trial `t` uses seed `base_seed + t` for
/// both its observation and attack streams, so results do not depend on
/// scheduling.
pub fn run_monte_carlo(config: &MonteCarloConfig, trials: usize) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::Contract("at least one trial is required".into()));
    }
    check_lengths(&config.net, &config.models)?;
    let initial = match &config.initial {
        Some(v) => v.clone(),
        None => vec![BeliefVector::uniform(); config.net.n_agents()],
    };
    let u = perron_eigenvector(&config.net, CENTRALITY_TOL)?;

    let materialize = |seed: u64| {
        AttackSpec::materialize(
            config.family,
            config.prior,
            config.epsilon,
            &config.net,
            &config.models,
            &mut attack_rng(seed),
        )
    };
    let shared = if config.family == AttackFamily::Random {
        None
    } else {
        let attack = materialize(config.base_seed)?;
        let pred = classify_limit(&config.net, &u, &config.models, &attack, DEFAULT_CLASSIFY_TOL)?;
        Some((attack, pred))
    };

    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<TrialResult> {
            let seed = config.base_seed.wrapping_add(t as u64);
            let (attack, pred) = match &shared {
                Some((a, p)) => (a.clone(), p.clone()),
                None => {
                    let a = materialize(seed)?;
                    let p = classify_limit(&config.net, &u, &config.models, &a, DEFAULT_CLASSIFY_TOL)?;
                    (a, p)
                }
            };
            let traj = if config.iterations == 0 {
                Trajectory {
                    beliefs: vec![initial.clone()],
                    true_state: config.true_state,
                    seed,
                    network_id: String::new(),
                    attack: attack.describe(),
                }
            } else {
                run_trial_from(
                    &config.net,
                    &config.models,
                    &attack,
                    &initial,
                    config.true_state,
                    config.iterations,
                    seed,
                )?
            };
            let outcome = detect_outcome(&traj, config.threshold, config.window)?;
            let average = average_belief(&traj, config.true_state);
            let state = pred.state(config.true_state);
            Ok(TrialResult {
                index: t,
                seed,
                outcome,
                predicted: state.verdict,
                margin: state.margin,
                final_average: *average.last().expect("row 0 always present"),
                clamp_count: attack.clamp_count(),
                attack,
                average,
                trajectory: config.keep_trajectories.then_some(traj),
            })
        })
        .collect::<Result<_>>()?;

    let agreements: Vec<bool> = results.iter().filter_map(TrialResult::agrees).collect();
    let decided = agreements.len();
    let agreement_rate =
        (decided > 0).then(|| agreements.iter().filter(|&&a| a).count() as f64 / decided as f64);

    let rounds = config.iterations + 1;
    let mut mean_trajectory = vec![0.0; rounds];
    for r in &results {
        for (m, v) in mean_trajectory.iter_mut().zip(&r.average) {
            *m += v;
        }
    }
    for m in &mut mean_trajectory {
        *m /= trials as f64;
    }

    Ok(MonteCarloSummary {
        true_state: config.true_state,
        trials: results,
        prediction: shared.map(|(_, p)| p),
        agreement_rate,
        decided,
        mean_trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::DEFAULT_EPSILON;
    use crate::engine::outcome::{DEFAULT_THRESHOLD, DEFAULT_WINDOW};
    use crate::models::make_bsc;
    use crate::topology::star_topology;

    fn config(net: Network, family: AttackFamily, iterations: usize) -> MonteCarloConfig {
        let n = net.n_agents();
        MonteCarloConfig {
            net,
            models: vec![make_bsc(0.8).unwrap(); n],
            family,
            prior: Prior::default(),
            epsilon: DEFAULT_EPSILON,
            true_state: Hypothesis::Theta1,
            iterations,
            base_seed: 100,
            threshold: DEFAULT_THRESHOLD,
            window: DEFAULT_WINDOW,
            initial: None,
            keep_trajectories: false,
        }
    }

    #[test]
    fn honest_agrees_fully() {
        let cfg = config(star_topology(15, false, 0).unwrap(), AttackFamily::Honest, 500);
        let s = run_monte_carlo(&cfg, 20).unwrap();
        assert_eq!(s.prediction.as_ref().unwrap().verdict(Hypothesis::Theta1), Verdict::True);
        assert_eq!(s.agreement_rate, Some(1.0));
        assert_eq!(s.decided, 20);
    }

    #[test]
    fn star_asud_is_misled() {
        let cfg = config(star_topology(15, true, 4).unwrap(), AttackFamily::Asud, 2000);
        let s = run_monte_carlo(&cfg, 20).unwrap();
        assert!(s.agreement_rate.unwrap() >= 0.95);
        assert!(*s.mean_trajectory.last().unwrap() < 0.01);
    }

    #[test]
    fn zero_iterations_undecided() {
        let cfg = config(star_topology(5, false, 0).unwrap(), AttackFamily::Honest, 0);
        let s = run_monte_carlo(&cfg, 1).unwrap();
        assert_eq!(s.trials[0].outcome, EmpiricalOutcome::Undecided);
        assert_eq!(s.agreement_rate, None);
        assert_eq!(s.mean_trajectory, vec![0.5]);
    }

    #[test]
    fn independent_of_scheduling() {
        let mut cfg = config(star_topology(15, true, 4).unwrap(), AttackFamily::Random, 100);
        cfg.keep_trajectories = true;
        let a = run_monte_carlo(&cfg, 6).unwrap();
        let b = run_monte_carlo(&cfg, 6).unwrap();
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.trajectory, y.trajectory);
            assert_eq!(x.attack, y.attack);
        }
        assert_ne!(a.trials[0].attack, a.trials[1].attack);
        assert!(a.prediction.is_none());
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = config(star_topology(5, false, 0).unwrap(), AttackFamily::Honest, 10);
        assert!(run_monte_carlo(&cfg, 0).is_err());
    }
}
