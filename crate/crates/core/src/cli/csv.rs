//! Trajectory and summary CSV formats.

use std::fmt::Write as _;

use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::topology::Network;

pub const TRAJECTORY_HEADER: &str = "iter,agent,role,belief_theta1,belief_theta2";
pub const SUMMARY_HEADER: &str = "iter,avg_belief_true_state";

/// 17 significant digits.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory, net: &Network) -> String {
    let mut out = String::with_capacity(traj.beliefs.len() * traj.n_agents() * 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (i, row) in traj.beliefs.iter().enumerate() {
        for (k, b) in row.iter().enumerate() {
            let [b1, b2] = b.probs();
            let _ = writeln!(out, "{i},{k},{},{},{}", net.role(k).as_str(), float(b1), float(b2));
        }
    }
    out
}

pub fn summary_csv(average: &[f64]) -> String {
    let mut out = String::with_capacity(average.len() * 32);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for (i, v) in average.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", float(*v));
    }
    out
}

fn csv_err(file: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn check_header<'a>(
    file: &str,
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => Ok(lines.filter(|(_, l)| !l.trim().is_empty())),
        Some((_, h)) => Err(csv_err(file, 1, format!("expected header `{header}`, found `{h}`"))),
        None => Err(csv_err(file, 1, "file is empty")),
    }
}

fn parse_probability(file: &str, line: usize, field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| csv_err(file, line, format!("{name} `{field}` is not a number")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(csv_err(file, line, format!("{name} {v} outside [0, 1]")));
    }
    Ok(v)
}

fn parse_index(file: &str, line: usize, field: &str, name: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| csv_err(file, line, format!("{name} `{field}` is not a nonnegative integer")))
}

/// Parses a summary CSV into `(iter, value)` rows. Iterations must start at
/// zero and increase by one.
pub fn parse_summary_csv(file: &str, text: &str) -> Result<Vec<(usize, f64)>> {
    let mut rows = Vec::new();
    for (line, l) in check_header(file, text, SUMMARY_HEADER)? {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(csv_err(file, line, format!("expected 2 fields, found {}", fields.len())));
        }
        let iter = parse_index(file, line, fields[0], "iter")?;
        if iter != rows.len() {
            return Err(csv_err(file, line, format!("expected iter {}, found {iter}", rows.len())));
        }
        rows.push((iter, parse_probability(file, line, fields[1], "avg_belief_true_state")?));
    }
    if rows.is_empty() {
        return Err(csv_err(file, 2, "no data rows"));
    }
    Ok(rows)
}

/// Checks a trajectory CSV: header, field types, row order, roles and
/// normalization within 1e-12. Returns the number of data rows.
pub fn validate_trajectory_csv(file: &str, text: &str) -> Result<usize> {
    let mut rows = Vec::new();
    for (line, l) in check_header(file, text, TRAJECTORY_HEADER)? {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 5 {
            return Err(csv_err(file, line, format!("expected 5 fields, found {}", fields.len())));
        }
        let iter = parse_index(file, line, fields[0], "iter")?;
        let agent = parse_index(file, line, fields[1], "agent")?;
        if !matches!(fields[2], "normal" | "malicious") {
            return Err(csv_err(file, line, format!("unknown role `{}`", fields[2])));
        }
        let b1 = parse_probability(file, line, fields[3], "belief_theta1")?;
        let b2 = parse_probability(file, line, fields[4], "belief_theta2")?;
        if (b1 + b2 - 1.0).abs() > 1e-12 {
            return Err(csv_err(file, line, format!("beliefs sum to {}", b1 + b2)));
        }
        rows.push((line, iter, agent));
    }
    if rows.is_empty() {
        return Err(csv_err(file, 2, "no data rows"));
    }
    let n = rows.iter().take_while(|r| r.1 == 0).count().max(1);
    for (j, &(line, iter, agent)) in rows.iter().enumerate() {
        if (iter, agent) != (j / n, j % n) {
            return Err(csv_err(
                file,
                line,
                format!("expected iter {} agent {}, found iter {iter} agent {agent}", j / n, j % n),
            ));
        }
    }
    if rows.len() % n != 0 {
        return Err(csv_err(file, rows.last().unwrap().0, "last iteration is incomplete"));
    }
    Ok(rows.len())
}
