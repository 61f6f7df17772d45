use std::ffi::{c_char, c_int, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use social_learning_ffi::*;

const STAR: &str = r#"{
    "version": 1,
    "topology": {"kind": "star", "n": 15, "n_malicious": 4, "hub_is_malicious": true},
    "models": {"bsc_p": 0.8},
    "attack": {"family": "asud"},
    "true_state": 1,
    "iterations": 600,
    "trials": 4
}"#;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { sl_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn experiment(json: &str) -> Result<*mut SlExperiment, (SlStatus, String)> {
    let c = CString::new(json).unwrap();
    let mut exp = ptr::null_mut();
    match unsafe { sl_experiment_from_json(c.as_ptr(), &mut exp) } {
        SlStatus::Ok => Ok(exp),
        s => Err((s, last_error())),
    }
}

#[test]
fn analyze_star() {
    let exp = experiment(STAR).unwrap();
    unsafe {
        assert_eq!(sl_experiment_n_agents(exp), 15);
        let mut u = [0.0; 15];
        assert_eq!(sl_experiment_centrality(exp, u.as_mut_ptr(), u.len()), SlStatus::Ok);
        assert!((u[0] - 15.0 / 43.0).abs() < 1e-9);

        let mut short = [0.0; 3];
        assert_eq!(sl_experiment_centrality(exp, short.as_mut_ptr(), 3), SlStatus::BufferTooSmall);

        let mut p = SlPrediction::default();
        assert_eq!(sl_experiment_analyze(exp, &mut p), SlStatus::Ok);
        for s in p.states {
            assert_eq!(s.verdict, SL_WRONG);
            assert!((s.margin - 1.598).abs() < 1e-3);
        }
        sl_experiment_free(exp);
    }
}

#[test]
fn simulate_star() {
    let exp = experiment(STAR).unwrap();
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(sl_experiment_simulate(exp, 0, &mut sim), SlStatus::Ok);
        assert_eq!(sl_simulation_trials(sim), 4);
        let rounds = sl_simulation_rounds(sim);
        assert_eq!(rounds, 601);
        let mut traj = vec![0.0; rounds];
        assert_eq!(sl_simulation_mean_trajectory(sim, traj.as_mut_ptr(), rounds), SlStatus::Ok);
        assert_eq!(traj[0], 0.5);
        assert!(traj[rounds - 1] < 0.01);
        let mut o: c_int = -1;
        assert_eq!(sl_simulation_trial_outcome(sim, 0, &mut o), SlStatus::Ok);
        assert_eq!(o, SL_WRONG);
        assert_eq!(sl_simulation_trial_outcome(sim, 9, &mut o), SlStatus::InvalidArgument);
        assert_eq!(sl_simulation_agreement_rate(sim), 1.0);
        sl_simulation_free(sim);
        sl_experiment_free(exp);
    }
}

#[test]
fn config_errors_map_to_status() {
    let (status, msg) = experiment(&STAR.replace(r#""family": "asud""#, r#""family": "asud", "epsilon": 0.6"#)).unwrap_err();
    assert_eq!(status, SlStatus::Config);
    assert!(msg.contains("attack.epsilon"), "{msg}");
    let (status, _) = experiment("{ not json").unwrap_err();
    assert_eq!(status, SlStatus::Config);
}

#[test]
fn infeasible_is_numeric() {
    let json = STAR
        .replace(r#""n_malicious": 4, "hub_is_malicious": true"#, r#""n_malicious": 1, "hub_is_malicious": false"#)
        .replace("0.8", "0.95")
        .replace("asud", "known_divergence");
    let exp = experiment(&json).unwrap();
    unsafe {
        let mut p = SlPrediction::default();
        assert_eq!(sl_experiment_analyze(exp, &mut p), SlStatus::Numeric);
        assert!(last_error().contains("epsilon"));
        sl_experiment_free(exp);
    }
}

#[test]
fn null_arguments_rejected() {
    unsafe {
        assert_eq!(sl_experiment_from_json(ptr::null(), ptr::null_mut()), SlStatus::InvalidArgument);
        assert_eq!(sl_experiment_n_agents(ptr::null()), 0);
        let mut p = SlPrediction::default();
        assert_eq!(sl_experiment_analyze(ptr::null(), &mut p), SlStatus::InvalidArgument);
        sl_experiment_free(ptr::null_mut());
        sl_simulation_free(ptr::null_mut());
        assert!(sl_simulation_agreement_rate(ptr::null()).is_nan());
    }
}

#[test]
fn asud_entry_point() {
    let (l1, l2) = ([0.8, 0.2], [0.2, 0.8]);
    let (mut o1, mut o2) = ([0.0; 2], [0.0; 2]);
    let s = unsafe {
        sl_asud_attack(l1.as_ptr(), l2.as_ptr(), 2, 0.9, 0.1, 1e-3, o1.as_mut_ptr(), o2.as_mut_ptr())
    };
    assert_eq!(s, SlStatus::Ok);
    assert!((o1[0] - 0.001).abs() < 1e-12 && (o2[0] - 0.875).abs() < 1e-12);

    let s = unsafe {
        sl_asud_attack(l1.as_ptr(), l2.as_ptr(), 2, 0.9, 0.1, 0.7, o1.as_mut_ptr(), o2.as_mut_ptr())
    };
    assert_eq!(s, SlStatus::Config);
}

#[test]
fn version_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(sl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles and runs a small C program against the generated header and the
/// static library when a C compiler is present.
#[test]
fn c_program_links_against_header() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("../../target"));
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let lib = target.join(profile).join("libsocial_learning_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "social_learning.h"
int main(void) {
    const char *cfg = "{\"version\":1,\"topology\":{\"kind\":\"star\",\"n\":15,\"n_malicious\":4,\"hub_is_malicious\":true},"
                      "\"models\":{\"bsc_p\":0.8},\"attack\":{\"family\":\"asud\"},\"true_state\":1}";
    SlExperiment *exp = NULL;
    if (sl_experiment_from_json(cfg, &exp) != SL_STATUS_OK) return 1;
    SlPrediction p;
    if (sl_experiment_analyze(exp, &p) != SL_STATUS_OK) return 2;
    printf("%.6f %d\n", p.states[0].margin, p.states[0].verdict);
    sl_experiment_free(exp);
    char buf[256];
    if (sl_experiment_from_json("{}", &exp) != SL_STATUS_CONFIG) return 3;
    sl_last_error(buf, sizeof buf);
    return strlen(buf) > 0 ? 0 : 4;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), format!("1.598280 {SL_WRONG}"));
}
