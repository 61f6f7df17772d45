//! C ABI over the social-learning simulator.
//!
//! Every fallible function returns an [`SlStatus`]; on failure the message is
//! available through [`sl_last_error`] on the same thread. Handles are opaque
//! and must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use social_learning::attacks::{asud_attack, AttackSpec};
use social_learning::cli::{parse_config, Experiment};
use social_learning::engine::{
    attack_rng, classify_limit, run_monte_carlo, EmpiricalOutcome, MonteCarloSummary, Verdict, DEFAULT_CLASSIFY_TOL,
};
use social_learning::error::Error;
use social_learning::models::{AgentModel, Hypothesis, Pmf, Prior};
use social_learning::topology::{perron_eigenvector, CENTRALITY_TOL};

/// Result codes. The numeric values of the config, numeric and I/O classes
/// match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    /// Null pointer, bad length or invalid UTF-8.
    InvalidArgument = 1,
    Config = 2,
    Numeric = 3,
    Io = 4,
    /// Output buffer shorter than required.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Verdict codes used by [`SlStatePrediction`] and trial outcomes.
pub const SL_WRONG: c_int = 0;
pub const SL_TRUE: c_int = 1;
/// Indeterminate prediction or undecided simulation.
pub const SL_UNDECIDED: c_int = 2;

/// Opaque validated experiment.
pub struct SlExperiment {
    inner: Experiment,
}

/// Opaque Monte Carlo result.
pub struct SlSimulation {
    inner: MonteCarloSummary,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SlStatePrediction {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: c_int,
}

/// Index 0 is the prediction when the first state is true.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SlPrediction {
    pub states: [SlStatePrediction; 2],
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> SlStatus {
    match e.exit_code() {
        2 => SlStatus::Config,
        4 => SlStatus::Io,
        _ => SlStatus::Numeric,
    }
}

fn fail(e: Error) -> SlStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn invalid(msg: &str) -> SlStatus {
    set_error(msg);
    SlStatus::InvalidArgument
}

/// Runs `f`, turning panics into [`SlStatus::Internal`].
fn guard(f: impl FnOnce() -> SlStatus) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == SlStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Internal
        }
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Option<&'a [f64]> {
    if data.is_null() {
        return (len == 0).then_some(&[]);
    }
    Some(std::slice::from_raw_parts(data, len))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> SlStatus {
    if out.is_null() {
        return invalid("output buffer is null");
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} required", src.len()));
        return SlStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    SlStatus::Ok
}

fn verdict_code(v: Verdict) -> c_int {
    match v {
        Verdict::Wrong => SL_WRONG,
        Verdict::True => SL_TRUE,
        Verdict::Indeterminate => SL_UNDECIDED,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses and validates a JSON experiment configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_from_json(json: *const c_char, out: *mut *mut SlExperiment) -> SlStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return invalid("null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return invalid("config is not valid UTF-8");
        };
        match parse_config(text).and_then(|c| c.build()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SlExperiment { inner }));
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `exp` must be null or a handle from [`sl_experiment_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_free(exp: *mut SlExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_n_agents(exp: *const SlExperiment) -> usize {
    exp.as_ref().map_or(0, |e| e.inner.net.n_agents())
}

/// Writes the network centrality vector into `out[0..n_agents]`.
///
/// # Safety
/// `exp` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_centrality(exp: *const SlExperiment, out: *mut f64, len: usize) -> SlStatus {
    guard(|| {
        let Some(exp) = exp.as_ref() else {
            return invalid("null experiment");
        };
        match perron_eigenvector(&exp.inner.net, CENTRALITY_TOL) {
            Ok(u) => copy_out(u.as_slice(), out, len),
            Err(e) => fail(e),
        }
    })
}

/// Limit prediction for the configured attack (random attacks use the draw
/// of the base seed).
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_analyze(exp: *const SlExperiment, out: *mut SlPrediction) -> SlStatus {
    guard(|| {
        let (Some(exp), false) = (exp.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        let e = &exp.inner;
        let c = &e.config;
        let result = perron_eigenvector(&e.net, CENTRALITY_TOL).and_then(|u| {
            let attack = AttackSpec::materialize(
                c.attack.family,
                c.attack.prior,
                c.attack.epsilon(),
                &e.net,
                &e.models,
                &mut attack_rng(c.base_seed),
            )?;
            classify_limit(&e.net, &u, &e.models, &attack, DEFAULT_CLASSIFY_TOL)
        });
        match result {
            Ok(p) => {
                let mut r = SlPrediction::default();
                for h in Hypothesis::BOTH {
                    let s = p.state(h);
                    r.states[h.index()] = SlStatePrediction {
                        lhs: s.lhs,
                        rhs: s.rhs,
                        margin: s.margin,
                        verdict: verdict_code(s.verdict),
                    };
                }
                *out = r;
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the configured Monte Carlo batch. `trials == 0` uses the config value.
///
/// # Safety
/// `exp` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_experiment_simulate(
    exp: *const SlExperiment,
    trials: usize,
    out: *mut *mut SlSimulation,
) -> SlStatus {
    guard(|| {
        let (Some(exp), false) = (exp.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        *out = ptr::null_mut();
        let n = if trials == 0 { exp.inner.config.trials } else { trials };
        match run_monte_carlo(&exp.inner.monte_carlo(false), n) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SlSimulation { inner }));
                SlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `sim` must be null or a handle from [`sl_experiment_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_free(sim: *mut SlSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of recorded rounds, including the initial one.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_rounds(sim: *const SlSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.mean_trajectory.len())
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_trials(sim: *const SlSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.inner.trials.len())
}

/// Mean over trials of the average belief on the true state, per round.
///
/// # Safety
/// `sim` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_mean_trajectory(sim: *const SlSimulation, out: *mut f64, len: usize) -> SlStatus {
    guard(|| match sim.as_ref() {
        Some(s) => copy_out(&s.inner.mean_trajectory, out, len),
        None => invalid("null simulation"),
    })
}

/// Writes the empirical outcome code of trial `index`.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_trial_outcome(sim: *const SlSimulation, index: usize, out: *mut c_int) -> SlStatus {
    guard(|| {
        let (Some(s), false) = (sim.as_ref(), out.is_null()) else {
            return invalid("null argument");
        };
        let Some(t) = s.inner.trials.get(index) else {
            return invalid("trial index out of range");
        };
        *out = match t.outcome {
            EmpiricalOutcome::Wrong => SL_WRONG,
            EmpiricalOutcome::True => SL_TRUE,
            EmpiricalOutcome::Undecided => SL_UNDECIDED,
        };
        SlStatus::Ok
    })
}

/// Fraction of decided trials agreeing with the prediction; NaN when none
/// was decided.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_simulation_agreement_rate(sim: *const SlSimulation) -> f64 {
    sim.as_ref()
        .and_then(|s| s.inner.agreement_rate)
        .unwrap_or(f64::NAN)
}

/// Closed-form unknown-divergence distortion for one agent model.
///
/// # Safety
/// `l1`, `l2`, `out_l1`, `out_l2` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_asud_attack(
    l1: *const f64,
    l2: *const f64,
    n: usize,
    pi1: f64,
    pi2: f64,
    epsilon: f64,
    out_l1: *mut f64,
    out_l2: *mut f64,
) -> SlStatus {
    guard(|| {
        let (Some(a), Some(b)) = (slice(l1, n), slice(l2, n)) else {
            return invalid("null likelihood");
        };
        let result = Pmf::new(a.to_vec())
            .and_then(|p1| Ok((p1, Pmf::new(b.to_vec())?)))
            .and_then(|(p1, p2)| AgentModel::new(p1, p2))
            .and_then(|m| asud_attack(&m, Prior::new(pi1, pi2)?, epsilon));
        match result {
            Ok(d) => match copy_out(d.l1.masses(), out_l1, n) {
                SlStatus::Ok => copy_out(d.l2.masses(), out_l2, n),
                s => s,
            },
            Err(e) => fail(e),
        }
    })
}
