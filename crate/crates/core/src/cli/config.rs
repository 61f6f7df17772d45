//! Strict JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attacks::{check_epsilon, AttackFamily};
use crate::engine::{BeliefVector, MonteCarloConfig, DEFAULT_THRESHOLD, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::models::{make_bsc, AgentModel, Hypothesis, Prior};
use crate::topology::{complete_topology, random_topology, star_topology, Network, Role};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_ITERATIONS: usize = 2000;
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TopologySpec {
    Star {
        n: usize,
        n_malicious: usize,
        hub_is_malicious: bool,
    },
    Random {
        n: usize,
        n_malicious: usize,
        edge_prob: f64,
        #[serde(default)]
        seed: u64,
    },
    Complete {
        n: usize,
        n_malicious: usize,
    },
    /// Either neighbor lists with uniform weights or a full weight matrix.
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        adjacency: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<Vec<f64>>>,
        roles: Vec<Role>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BscParameter {
    Shared(f64),
    PerAgent(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bsc_p: Option<BscParameter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmfs: Option<Vec<AgentModel>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub family: AttackFamily,
    #[serde(default)]
    pub prior: Prior,
    /// Family default when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl AttackConfig {
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| self.family.default_epsilon())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_window")]
    pub window: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            threshold: DEFAULT_THRESHOLD,
            window: DEFAULT_WINDOW,
        }
    }
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub topology: TopologySpec,
    pub models: ModelSpec,
    pub attack: AttackConfig,
    pub true_state: Hypothesis,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub detection: DetectionConfig,
    /// Per-agent `(μ(θ₁), μ(θ₂))`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_beliefs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// A validated configuration together with the objects it describes.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub net: Network,
    pub models: Vec<AgentModel>,
    pub initial: Option<Vec<BeliefVector>>,
}

impl Experiment {
    pub fn monte_carlo(&self, keep_trajectories: bool) -> MonteCarloConfig {
        let c = &self.config;
        MonteCarloConfig {
            net: self.net.clone(),
            models: self.models.clone(),
            family: c.attack.family,
            prior: c.attack.prior,
            epsilon: c.attack.epsilon(),
            true_state: c.true_state,
            iterations: c.iterations,
            base_seed: c.base_seed,
            threshold: c.detection.threshold,
            window: c.detection.window,
            initial: self.initial.clone(),
            keep_trajectories,
        }
    }
}

pub fn parse_config(document: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    config.normalize();
    config.build()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Pretty JSON of the normalized configuration.
pub fn emit(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

/// Hex SHA-256 of [`emit`].
pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(emit(config).as_bytes()))
}

impl ExperimentConfig {
    /// Fills family-dependent defaults so the emitted form is explicit.
    pub fn normalize(&mut self) {
        self.attack.epsilon = Some(self.attack.epsilon());
    }

    /// Validates every field and builds the network and models.
    pub fn build(&self) -> Result<Experiment> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config(
                "version",
                format!("unsupported version {}, expected {CONFIG_VERSION}", self.version),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "at least one trial is required"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iterations", "iteration budget must be at least 1"));
        }
        let d = self.detection;
        if !(d.threshold > 0.0 && d.threshold < 0.5) {
            return Err(Error::config(
                "detection.threshold",
                format!("threshold must lie in (0, 0.5), got {}", d.threshold),
            ));
        }
        if d.window == 0 || d.window > self.iterations {
            return Err(Error::config(
                "detection.window",
                format!("window must lie in [1, iterations = {}], got {}", self.iterations, d.window),
            ));
        }

        let net = build_network(&self.topology).map_err(|e| Error::config("topology", e.to_string()))?;
        if !net.is_strongly_connected() {
            return Err(Error::config("topology", "network is not strongly connected"));
        }
        let n = net.n_agents();
        let models = build_models(&self.models, n)?;
        check_epsilon(self.attack.epsilon(), &models)?;

        let initial = match &self.initial_beliefs {
            None => None,
            Some(rows) => {
                if rows.len() != n {
                    return Err(Error::config(
                        "initial_beliefs",
                        format!("{} rows for {n} agents", rows.len()),
                    ));
                }
                let mut out = Vec::with_capacity(n);
                for (k, r) in rows.iter().enumerate() {
                    if (r[0] + r[1] - 1.0).abs() > 1e-12 {
                        return Err(Error::config(
                            format!("initial_beliefs[{k}]"),
                            "beliefs must sum to 1",
                        ));
                    }
                    out.push(
                        BeliefVector::from_probs(r[0], r[1])
                            .map_err(|e| Error::config(format!("initial_beliefs[{k}]"), e.to_string()))?,
                    );
                }
                Some(out)
            }
        };

        Ok(Experiment {
            config: self.clone(),
            net,
            models,
            initial,
        })
    }
}

fn build_network(spec: &TopologySpec) -> Result<Network> {
    match spec {
        TopologySpec::Star {
            n,
            n_malicious,
            hub_is_malicious,
        } => star_topology(*n, *hub_is_malicious, *n_malicious),
        TopologySpec::Random {
            n,
            n_malicious,
            edge_prob,
            seed,
        } => random_topology(*n, *n_malicious, *edge_prob, *seed),
        TopologySpec::Complete { n, n_malicious } => complete_topology(*n, *n_malicious),
        TopologySpec::Explicit {
            adjacency,
            weights,
            roles,
        } => match (adjacency, weights) {
            (Some(a), None) => Network::uniform(a, roles.clone()),
            (None, Some(w)) => Network::from_matrix(w, roles.clone()),
            _ => Err(Error::InvalidTopology(
                "explicit topology needs exactly one of adjacency or weights".into(),
            )),
        },
    }
}

fn build_models(spec: &ModelSpec, n: usize) -> Result<Vec<AgentModel>> {
    let bsc = |p: f64, path: String| make_bsc(p).map_err(|e| Error::config(path, e.to_string()));
    match (&spec.bsc_p, &spec.pmfs) {
        (Some(BscParameter::Shared(p)), None) => Ok(vec![bsc(*p, "models.bsc_p".into())?; n]),
        (Some(BscParameter::PerAgent(ps)), None) => {
            if ps.len() != n {
                return Err(Error::config("models.bsc_p", format!("{} values for {n} agents", ps.len())));
            }
            ps.iter()
                .enumerate()
                .map(|(k, &p)| bsc(p, format!("models.bsc_p[{k}]")))
                .collect()
        }
        (None, Some(pmfs)) => {
            if pmfs.len() != n {
                return Err(Error::config("models.pmfs", format!("{} models for {n} agents", pmfs.len())));
            }
            Ok(pmfs.clone())
        }
        _ => Err(Error::config("models", "give exactly one of bsc_p or pmfs")),
    }
}
