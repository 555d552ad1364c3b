//! Cartesian parameter sweeps from a key=value config with [section]
//! headers. One CSV row per valid run, stable column order, seeds
//! derived from (row, repetition) counters so growing the repetition
//! count never reshuffles earlier trials.

use std::path::Path;

use hsp_core::qft::{afft_circuit, analyze_odd_qft, dense_qft, plan_odd_qft, run_odd_qft, ApproxQftParams};
use hsp_core::rng::trial_rng;
use num_complex::Complex64;
use rand::Rng;

use crate::Outcome;

struct SweepConfig {
    name: String,
    seed: u64,
    states: usize,
    grid: Vec<(String, Vec<String>)>,
}

fn parse_config(text: &str) -> Result<SweepConfig, String> {
    let mut section = String::new();
    let mut name = None;
    let mut seed = None;
    let mut states = 1usize;
    let mut grid: Vec<(String, Vec<String>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or(format!("line {}: unterminated section header", lineno + 1))?;
            section = header.trim().to_string();
            if section != "experiment" && section != "grid" {
                return Err(format!("line {}: unknown section [{section}]", lineno + 1));
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(format!("line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match section.as_str() {
            "experiment" => match key {
                "name" => name = Some(value.to_string()),
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        format!("line {}: seed must be an integer", lineno + 1)
                    })?)
                }
                "states" => {
                    states = value.parse().map_err(|_| {
                        format!("line {}: states must be an integer", lineno + 1)
                    })?
                }
                _ => return Err(format!("line {}: unknown experiment key {key}", lineno + 1)),
            },
            "grid" => {
                if grid.iter().any(|(k, _)| k == key) {
                    return Err(format!("line {}: duplicate grid key {key}", lineno + 1));
                }
                grid.push((key.to_string(), expand_values(value, lineno + 1)?));
            }
            _ => return Err(format!("line {}: key outside any section", lineno + 1)),
        }
    }

    Ok(SweepConfig {
        name: name.ok_or("config misses experiment name")?,
        seed: seed.ok_or("config misses the mandatory seed")?,
        states,
        grid,
    })
}

/// "a..b" expands to the inclusive integer range; otherwise a comma
/// list. An empty value means an empty axis (and so an empty sweep).
fn expand_values(value: &str, lineno: usize) -> Result<Vec<String>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| format!("line {lineno}: bad range start"))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| format!("line {lineno}: bad range end"))?;
        if hi < lo {
            return Err(format!("line {lineno}: empty range {lo}..{hi}"));
        }
        return Ok((lo..=hi).map(|v| v.to_string()).collect());
    }
    Ok(value.split(',').map(|t| t.trim().to_string()).collect())
}

/// All grid combinations, first key slowest. No keys means no rows.
fn cartesian(grid: &[(String, Vec<String>)]) -> Vec<Vec<String>> {
    if grid.is_empty() || grid.iter().any(|(_, vals)| vals.is_empty()) {
        return Vec::new();
    }
    let mut rows: Vec<Vec<String>> = vec![Vec::new()];
    for (_, vals) in grid {
        rows = rows
            .iter()
            .flat_map(|row| {
                vals.iter().map(move |v| {
                    let mut next = row.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    rows
}

fn grid_axis<'a>(cfg: &'a SweepConfig, key: &str) -> Option<&'a [String]> {
    cfg.grid
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_slice())
}

fn require_axes(cfg: &SweepConfig, expected: &[&str]) -> Result<(), String> {
    for (key, _) in &cfg.grid {
        if !expected.contains(&key.as_str()) {
            return Err(format!(
                "grid key {key} is not a parameter of {} (expected {})",
                cfg.name,
                expected.join(", ")
            ));
        }
    }
    for key in expected {
        if !cfg.grid.is_empty() && grid_axis(cfg, key).is_none() {
            return Err(format!("grid misses parameter {key} of {}", cfg.name));
        }
    }
    Ok(())
}

fn random_unit_amps(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

fn rep_rng(seed: u64, row: usize, rep: usize) -> impl Rng {
    trial_rng(seed, ((row as u64) << 20) | rep as u64)
}

fn sweep_afft(cfg: &SweepConfig) -> Result<(String, bool), String> {
    require_axes(cfg, &["n", "m"])?;
    let mut csv = String::from("n,m,predicted_error,measured_error,ok\n");
    let mut violation = false;
    let mut row_idx = 0usize;
    for combo in cartesian(&cfg.grid) {
        let lookup = |key: &str| {
            let pos = cfg.grid.iter().position(|(k, _)| k == key).expect("validated");
            combo[pos].as_str()
        };
        let n: usize = lookup("n").parse().map_err(|_| "n must be an integer")?;
        let m: usize = lookup("m").parse().map_err(|_| "m must be an integer")?;
        if n == 0 || m == 0 || m > n {
            continue;
        }
        let params = ApproxQftParams::new(n, m).map_err(|e| e.to_string())?;
        let circ = afft_circuit(&params).map_err(|e| e.to_string())?;
        let dim = 1usize << n;
        let dense = dense_qft(dim).map_err(|e| e.to_string())?;
        let mut measured = 0.0f64;
        for rep in 0..cfg.states {
            let mut rng = rep_rng(cfg.seed, row_idx, rep);
            let psi = hsp_core::statevec::StateVector::from_amplitudes(random_unit_amps(
                dim, &mut rng,
            ))
            .map_err(|e| e.to_string())?;
            let reference = dense.apply(&psi).map_err(|e| e.to_string())?;
            let mut out = psi;
            circ.apply_to(&mut out).map_err(|e| e.to_string())?;
            let err = out
                .amplitudes()
                .iter()
                .zip(reference.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            measured = measured.max(err);
        }
        let ok = measured <= params.predicted_error();
        violation |= !ok;
        csv.push_str(&format!(
            "{n},{m},{},{},{}\n",
            params.predicted_error(),
            measured,
            ok
        ));
        row_idx += 1;
    }
    Ok((csv, violation))
}

fn sweep_odd_qft(cfg: &SweepConfig) -> Result<(String, bool), String> {
    require_axes(cfg, &["N", "eps"])?;
    let mut csv = String::from(
        "N,eps,L,M,c1,c2,qubits,residual,residual_lambda,tv_distance,ok\n",
    );
    let mut violation = false;
    let mut row_idx = 0usize;
    for combo in cartesian(&cfg.grid) {
        let lookup = |key: &str| {
            let pos = cfg.grid.iter().position(|(k, _)| k == key).expect("validated");
            combo[pos].as_str()
        };
        let n: u64 = lookup("N").parse().map_err(|_| "N must be an integer")?;
        let eps: f64 = lookup("eps").parse().map_err(|_| "eps must be a number")?;
        let plan = plan_odd_qft(n, eps).map_err(|e| e.to_string())?;
        let mut worst_residual = 0.0f64;
        let mut worst_lambda = 0.0f64;
        let mut worst_tv = 0.0f64;
        for rep in 0..cfg.states {
            let mut rng = rep_rng(cfg.seed, row_idx, rep);
            let u = hsp_core::statevec::StateVector::from_amplitudes(random_unit_amps(
                n as usize, &mut rng,
            ))
            .map_err(|e| e.to_string())?;
            let run = run_odd_qft(&u, &plan).map_err(|e| e.to_string())?;
            let report = analyze_odd_qft(&u, &run).map_err(|e| e.to_string())?;
            worst_residual = worst_residual.max(report.residual);
            worst_lambda = worst_lambda.max(report.residual_lambda);
            worst_tv = worst_tv.max(report.tv_distance);
        }
        let ok = worst_lambda <= eps && worst_tv <= 2.0 * eps + eps * eps;
        violation |= !ok;
        csv.push_str(&format!(
            "{n},{eps},{},{},{},{},{},{},{},{},{}\n",
            plan.l,
            plan.m,
            plan.c1.unwrap_or(f64::NAN),
            plan.c2.unwrap_or(f64::NAN),
            plan.qubits(),
            worst_residual,
            worst_lambda,
            worst_tv,
            ok
        ));
        row_idx += 1;
    }
    Ok((csv, violation))
}

pub fn run_sweep_file(path: &Path) -> Result<Outcome, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg = parse_config(&text)?;
    let (report, violation) = match cfg.name.as_str() {
        "afft" => sweep_afft(&cfg)?,
        "odd-qft" => sweep_odd_qft(&cfg)?,
        other => return Err(format!("unknown experiment {other}")),
    };
    Ok(Outcome { report, violation })
}
