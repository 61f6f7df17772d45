use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::attacks::{misleads_both_states, AttackSpec, ClampEvent, Distortion, KnownDivergenceParams, MisleadCheck, Regime};
use crate::engine::{attack_rng, classify_limit, run_monte_carlo, MonteCarloSummary, OutcomePrediction, TrialResult, DEFAULT_CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::models::{network_divergence, Hypothesis, Pmf};
use crate::topology::{perron_eigenvector, Centrality, Role, CENTRALITY_TOL};

use super::config::{config_hash, Experiment, ExperimentConfig};
use super::csv::{parse_summary_csv, summary_csv, trajectory_csv};
use super::plot::{render_svg, Series};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const ATTACK_FILE: &str = "attack.json";
pub const PLOT_FILE: &str = "plot.svg";

pub fn trajectory_file(trial: usize) -> String {
    format!("trajectory_trial_{trial:03}.csv")
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct AgentClamps<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    trial: Option<usize>,
    agent: usize,
    #[serde(flatten)]
    event: &'a ClampEvent,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    config_sha256: String,
    config: &'a ExperimentConfig,
    true_state: Hypothesis,
    iterations: usize,
    trials: usize,
    seeds: Vec<u64>,
    prediction: Option<&'a OutcomePrediction>,
    agreement_rate: Option<f64>,
    decided_trials: usize,
    clamp_events: Vec<AgentClamps<'a>>,
    trial_results: &'a [TrialResult],
    summary_file: &'static str,
    trajectory_files: Vec<String>,
}

/// Outcome of a `simulate` run, returned for printing and testing.
pub struct SimulateReport {
    pub summary: MonteCarloSummary,
    pub out_dir: PathBuf,
}

pub fn cmd_simulate(exp: &Experiment, out_dir: &Path) -> Result<SimulateReport> {
    ensure_dir(out_dir)?;
    let summary = run_monte_carlo(&exp.monte_carlo(true), exp.config.trials)?;

    let mut trajectory_files = Vec::with_capacity(summary.trials.len());
    for t in &summary.trials {
        let traj = t.trajectory.as_ref().expect("trajectories kept");
        let name = trajectory_file(t.index);
        write(&out_dir.join(&name), &trajectory_csv(traj, &exp.net))?;
        trajectory_files.push(name);
    }
    write(&out_dir.join(SUMMARY_FILE), &summary_csv(&summary.mean_trajectory))?;

    let shared = summary.prediction.is_some();
    let clamp_events = summary
        .trials
        .iter()
        .take(if shared { 1 } else { summary.trials.len() })
        .flat_map(|t| {
            t.attack.distortions().flat_map(move |(agent, d)| {
                d.clamps.iter().map(move |event| AgentClamps {
                    trial: (!shared).then_some(t.index),
                    agent,
                    event,
                })
            })
        })
        .collect();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(&exp.config),
        config: &exp.config,
        true_state: exp.config.true_state,
        iterations: exp.config.iterations,
        trials: exp.config.trials,
        seeds: summary.trials.iter().map(|t| t.seed).collect(),
        prediction: summary.prediction.as_ref(),
        agreement_rate: summary.agreement_rate,
        decided_trials: summary.decided,
        clamp_events,
        trial_results: &summary.trials,
        summary_file: SUMMARY_FILE,
        trajectory_files,
    };
    write(&out_dir.join(MANIFEST_FILE), &to_json(&manifest))?;
    Ok(SimulateReport {
        summary,
        out_dir: out_dir.to_path_buf(),
    })
}

pub fn simulate_text(r: &SimulateReport) -> String {
    let s = &r.summary;
    let mut out = format!(
        "true state: {}\ntrials: {} (wrong {}, true {}, undecided {})\n",
        s.true_state,
        s.trials.len(),
        s.count(crate::engine::EmpiricalOutcome::Wrong),
        s.count(crate::engine::EmpiricalOutcome::True),
        s.count(crate::engine::EmpiricalOutcome::Undecided),
    );
    if let Some(p) = &s.prediction {
        let st = p.state(s.true_state);
        out += &format!("prediction: {} (margin {:.6})\n", st.verdict.as_str(), st.margin);
    }
    out += &match s.agreement_rate {
        Some(a) => format!("agreement with prediction: {:.3} over {} decided trials\n", a, s.decided),
        None => "agreement with prediction: no decided trials\n".to_string(),
    };
    out += &format!(
        "final average belief on true state: {:.6e}\noutput: {}\n",
        s.mean_trajectory.last().copied().unwrap_or(f64::NAN),
        r.out_dir.display()
    );
    out
}

/// Attack materialized as in trial 0 of `simulate`, with the shared analysis
/// inputs.
struct Materialized {
    u: Centrality,
    s: [f64; 2],
    attack: AttackSpec,
}

fn materialize(exp: &Experiment) -> Result<Materialized> {
    let c = &exp.config;
    let u = perron_eigenvector(&exp.net, CENTRALITY_TOL)?;
    let s1 = network_divergence(&exp.net, &u, &exp.models, Hypothesis::Theta1)?;
    let s2 = network_divergence(&exp.net, &u, &exp.models, Hypothesis::Theta2)?;
    let attack = AttackSpec::materialize(
        c.attack.family,
        c.attack.prior,
        c.attack.epsilon(),
        &exp.net,
        &exp.models,
        &mut attack_rng(c.base_seed),
    )?;
    Ok(Materialized { u, s: [s1, s2], attack })
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub config_sha256: String,
    pub family: &'static str,
    pub centrality: Vec<f64>,
    pub malicious_centrality: f64,
    pub s1: f64,
    pub s2: f64,
    pub prediction: OutcomePrediction,
}

pub fn cmd_analyze(exp: &Experiment, out_dir: &Path) -> Result<AnalysisReport> {
    let m = materialize(exp)?;
    let prediction = classify_limit(&exp.net, &m.u, &exp.models, &m.attack, DEFAULT_CLASSIFY_TOL)?;
    let report = AnalysisReport {
        config_sha256: config_hash(&exp.config),
        family: exp.config.attack.family.as_str(),
        centrality: m.u.as_slice().to_vec(),
        malicious_centrality: m.u.mass(&exp.net, Role::Malicious),
        s1: m.s[0],
        s2: m.s[1],
        prediction,
    };
    ensure_dir(out_dir)?;
    write(&out_dir.join(ANALYSIS_FILE), &to_json(&report))?;
    Ok(report)
}

pub fn analysis_text(r: &AnalysisReport) -> String {
    let mut out = format!(
        "attack: {}\nmalicious centrality mass: {:.6}\nS1 = {:.9}\nS2 = {:.9}\n",
        r.family, r.malicious_centrality, r.s1, r.s2
    );
    for st in &r.prediction.states {
        out += &format!(
            "true state {}: LHS = {:.9}, RHS = {:.9}, margin = {:+.9} -> {}\n",
            st.true_state,
            st.lhs,
            st.rhs,
            st.margin,
            st.verdict.as_str()
        );
        for (agent, c) in &st.contributions {
            out += &format!("  adversary {agent}: {c:+.9}\n");
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct AdversaryReport {
    pub agent: usize,
    pub centrality: f64,
    pub regime: Regime,
    pub l1: Pmf,
    pub l2: Pmf,
    pub clamps: Vec<ClampEvent>,
    /// Per-agent misleading check against the network divergences.
    pub check: MisleadCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_divergence: Option<KnownDivergenceParams>,
}

#[derive(Debug, Serialize)]
pub struct AttackReport {
    pub config_sha256: String,
    pub family: &'static str,
    pub epsilon: f64,
    pub prior: [f64; 2],
    pub s1: f64,
    pub s2: f64,
    pub adversaries: Vec<AdversaryReport>,
}

pub fn cmd_attack(exp: &Experiment, out_dir: &Path) -> Result<AttackReport> {
    let m = materialize(exp)?;
    let adversaries = m
        .attack
        .distortions()
        .map(|(k, d): (usize, &Distortion)| {
            let u = m.u.get(k);
            Ok(AdversaryReport {
                agent: k,
                centrality: u,
                regime: d.regime,
                l1: d.l1.clone(),
                l2: d.l2.clone(),
                clamps: d.clamps.clone(),
                check: misleads_both_states(&exp.models[k], u, &d.l1, &d.l2, m.s[0], m.s[1])?,
                known_divergence: d.known.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = AttackReport {
        config_sha256: config_hash(&exp.config),
        family: exp.config.attack.family.as_str(),
        epsilon: m.attack.epsilon,
        prior: m.attack.prior.into(),
        s1: m.s[0],
        s2: m.s[1],
        adversaries,
    };
    ensure_dir(out_dir)?;
    write(&out_dir.join(ATTACK_FILE), &to_json(&report))?;
    Ok(report)
}

pub fn attack_text(r: &AttackReport) -> String {
    let mut out = format!("attack: {} epsilon={}\n", r.family, r.epsilon);
    for a in &r.adversaries {
        out += &format!(
            "agent {} ({:?}): L1^ = {:?}, L2^ = {:?}, margins = ({:+.6}, {:+.6}){}\n",
            a.agent,
            a.regime,
            a.l1.masses(),
            a.l2.masses(),
            a.check.margins[0],
            a.check.margins[1],
            if a.clamps.is_empty() { "" } else { ", clamped" }
        );
    }
    out
}

/// Reads summary CSVs and writes one SVG. Labels default to file stems.
pub fn cmd_plot(inputs: &[PathBuf], labels: &[String], title: &str, out_dir: &Path) -> Result<PathBuf> {
    if inputs.is_empty() {
        return Err(Error::config("inputs", "at least one summary CSV is required"));
    }
    if !labels.is_empty() && labels.len() != inputs.len() {
        return Err(Error::config(
            "label",
            format!("{} labels for {} inputs", labels.len(), inputs.len()),
        ));
    }
    let mut series = Vec::with_capacity(inputs.len());
    for (i, path) in inputs.iter().enumerate() {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let points = parse_summary_csv(&path.display().to_string(), &text)?;
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            path.file_stem()
                .map_or_else(|| format!("series {i}"), |s| s.to_string_lossy().into_owned())
        });
        series.push(Series { label, points });
    }
    ensure_dir(out_dir)?;
    let out = out_dir.join(PLOT_FILE);
    write(&out, &render_svg(&series, title))?;
    Ok(out)
}
