//! Subcommand implementations. Every command returns a JSON report and
//! a violation flag; the flag is set only when an asserted bound fails
//! on this run, never on an input error.

use std::path::Path;

use hsp_core::abelian::{
    solve_hsp_with_sampler, AbelianGroup, CosetOracle, HspSampler, Subgroup,
};
use hsp_core::bounds::{
    chernoff_check, gcd_probability_check, generation_probability_check, totient_sum_check,
    TrialReport,
};
use hsp_core::ehk::{ehk_run_with, FiniteGroupTable, TableCosetOracle};
use hsp_core::graphs::{
    acount_via_iso, imap_via_iso, iso_via_acount, iso_via_agen, iso_via_apart, Graph, IsoOracle,
};
use hsp_core::problems::{cyclic_hsp_run_with, shor_factor, simon_solve_with, SimonInstance};
use hsp_core::qft::{
    afft_circuit, analyze_odd_qft, dense_qft, exact_qft_circuit, plan_odd_qft, run_odd_qft,
    ApproxQftParams, OddQftPlan,
};
use hsp_core::rng::{master_rng, trial_rng};
use hsp_core::statevec::{basis_state, StateVector};
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::{IsoVia, Outcome};

fn lib<T>(r: hsp_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

fn random_unit_state(dim: usize, rng: &mut impl Rng) -> Result<StateVector, String> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    lib(StateVector::from_amplitudes(v))
}

/// Wrap per-repetition payloads in the run-report envelope: config
/// echo, every result, aggregate statistics, toolkit version.
fn envelope(config: Value, results: Vec<Value>, successes: u64) -> Value {
    let n = results.len() as u64;
    json!({
        "config": config,
        "results": results,
        "aggregate": {
            "repetitions": n,
            "successes": successes,
            "success_rate": successes as f64 / n as f64,
        },
        "version": env!("CARGO_PKG_VERSION"),
    })
}

// ------------------------------------------------------------------
// qft

pub fn qft_verify(n: usize) -> Result<Outcome, String> {
    let circ = lib(exact_qft_circuit(n))?;
    let dim = 1usize << n;
    let f = lib(dense_qft(dim))?;
    let mut max_error = 0.0f64;
    for k in 0..dim {
        let mut s = lib(basis_state(dim, k))?;
        lib(circ.apply_to(&mut s))?;
        for (j, a) in s.amplitudes().iter().enumerate() {
            max_error = max_error.max((a - f.matrix()[(j, k)]).norm());
        }
    }
    let ok = max_error < 1e-9;
    let report = json!({
        "n": n,
        "gates": circ.size(),
        "depth": circ.depth(),
        "max_error": max_error,
        "bound": 1e-9,
        "ok": ok,
    });
    Ok(Outcome::json(report, !ok))
}

pub fn qft_afft(n: usize, m: usize, seed: u64, states: usize) -> Result<Outcome, String> {
    let params = lib(ApproxQftParams::new(n, m))?;
    let circ = lib(afft_circuit(&params))?;
    let dim = 1usize << n;
    let dense = lib(dense_qft(dim))?;
    let mut measured = 0.0f64;
    for i in 0..states {
        let mut rng = trial_rng(seed, i as u64);
        let psi = random_unit_state(dim, &mut rng)?;
        let reference = lib(dense.apply(&psi))?;
        let mut out = psi;
        lib(circ.apply_to(&mut out))?;
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
    let report = json!({
        "n": n,
        "m": m,
        "states": states,
        "predicted_error": params.predicted_error(),
        "measured_error": measured,
        "ok": ok,
    });
    Ok(Outcome::json(report, !ok))
}

// ------------------------------------------------------------------
// odd-qft

fn parse_input_state(spec: &str, dim: usize, seed: u64) -> Result<StateVector, String> {
    if let Some(k) = spec.strip_prefix("basis") {
        let k: usize = k
            .parse()
            .map_err(|_| format!("bad basis index in --u {spec}"))?;
        return lib(basis_state(dim, k));
    }
    match spec {
        "uniform" => {
            let all: Vec<usize> = (0..dim).collect();
            lib(StateVector::uniform_over(dim, &all))
        }
        "random" => random_unit_state(dim, &mut master_rng(seed)),
        _ => Err(format!("--u must be basisK, uniform, or random, got {spec}")),
    }
}

pub fn odd_qft(
    n: u64,
    eps: f64,
    u_spec: &str,
    seed: u64,
    l: Option<u64>,
    m: Option<u64>,
) -> Result<Outcome, String> {
    let plan = match (l, m) {
        (None, None) => lib(plan_odd_qft(n, eps))?,
        (Some(l), Some(m)) => {
            let mut plan = lib(OddQftPlan::manual(n, l, m))?;
            plan.epsilon = Some(eps);
            plan
        }
        _ => return Err("--L and --M must be given together".into()),
    };
    let u = parse_input_state(u_spec, n as usize, seed)?;
    let run = lib(run_odd_qft(&u, &plan))?;
    let report = lib(analyze_odd_qft(&u, &run))?;
    let tv_bound = 2.0 * eps + eps * eps;
    let violation = report.residual_lambda > eps || report.tv_distance > tv_bound;
    Ok(Outcome::json(report.to_json(), violation))
}

// ------------------------------------------------------------------
// hsp

pub fn hsp(group: &str, hidden: &str, seed: u64, repetitions: u64) -> Result<Outcome, String> {
    let g = lib(AbelianGroup::parse(group))?;
    let h = lib(Subgroup::parse(&g, hidden))?;
    let oracle = lib(CosetOracle::new(&g, h.clone()))?;
    let sampler = lib(HspSampler::new(&g, &oracle))?;
    let t = ceil_log2(g.order()) + 1;
    let sample_count = (t as u64 + ceil_log2(g.order()) as u64) as usize;

    let mut results = Vec::new();
    let mut successes = 0u64;
    for rep in 0..repetitions {
        let mut rng = trial_rng(seed, rep);
        // The solver reads the identical stream, so these are exactly
        // its quantum samples.
        let samples: Vec<Vec<u64>> = {
            let mut trace = rng.clone();
            (0..sample_count)
                .map(|_| sampler.sample(&mut trace).coords().to_vec())
                .collect()
        };
        let recovered = lib(solve_hsp_with_sampler(&g, &sampler, t, t, &mut rng))?;
        let success = recovered.set_eq(&h);
        successes += success as u64;
        results.push(json!({
            "group": group,
            "hidden": hidden,
            "recovered": recovered.indices(),
            "samples": samples,
            "success": success,
        }));
    }
    let report = if repetitions == 1 {
        results.pop().expect("one repetition ran")
    } else {
        let config = json!({
            "command": "hsp", "group": group, "hidden": hidden,
            "seed": seed, "repetitions": repetitions,
        });
        envelope(config, results, successes)
    };
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// cyclic-hsp

pub fn cyclic_hsp(
    n: u64,
    d: u64,
    samples: usize,
    seed: u64,
    repetitions: u64,
) -> Result<Outcome, String> {
    if d == 0 || n % d != 0 {
        return Err(format!("--d must divide N: got d={d}, N={n}"));
    }
    let g = lib(AbelianGroup::new(vec![n]))?;
    let h = lib(Subgroup::parse(&g, &format!("[({d})]")))?;
    let oracle = lib(CosetOracle::new(&g, h))?;
    let sampler = lib(HspSampler::new(&g, &oracle))?;

    let mut results = Vec::new();
    let mut successes = 0u64;
    for rep in 0..repetitions {
        let mut rng = trial_rng(seed, rep);
        let run = lib(cyclic_hsp_run_with(&g, &sampler, samples, &mut rng))?;
        let success = run.generator == d;
        successes += success as u64;
        results.push(json!({
            "N": n,
            "d": d,
            "samples": run.samples,
            "gcd": run.gcd,
            "generator": run.generator,
            "success": success,
        }));
    }
    let report = if repetitions == 1 {
        results.pop().expect("one repetition ran")
    } else {
        let config = json!({
            "command": "cyclic-hsp", "N": n, "d": d,
            "samples": samples, "seed": seed, "repetitions": repetitions,
        });
        envelope(config, results, successes)
    };
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// simon

pub fn simon(n: usize, s: Option<u64>, seed: u64, repetitions: u64) -> Result<Outcome, String> {
    if n == 0 || n > 16 {
        return Err(format!("--n must lie in 1..=16, got {n}"));
    }
    let s = match s {
        Some(s) => s,
        None => master_rng(seed ^ 0x5100).gen_range(0..(1u64 << n)),
    };
    let inst = lib(SimonInstance::new(n, s))?;
    let sampler = lib(HspSampler::new(inst.group(), inst.oracle()))?;
    let sample_count = (n + 1) + n;

    let mut results = Vec::new();
    let mut successes = 0u64;
    for rep in 0..repetitions {
        let mut rng = trial_rng(seed, rep);
        let samples: Vec<u64> = {
            let mut trace = rng.clone();
            (0..sample_count)
                .map(|_| inst.group().index_of(&sampler.sample(&mut trace)) as u64)
                .collect()
        };
        let recovered = lib(simon_solve_with(&inst, &sampler, &mut rng))?;
        let success = recovered == s;
        successes += success as u64;
        results.push(json!({
            "n": n,
            "s": s,
            "samples": samples,
            "recovered": recovered,
            "success": success,
        }));
    }
    let report = if repetitions == 1 {
        results.pop().expect("one repetition ran")
    } else {
        let config = json!({
            "command": "simon", "n": n, "s": s,
            "seed": seed, "repetitions": repetitions,
        });
        envelope(config, results, successes)
    };
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// shor

pub fn shor(n: u64, seed: u64) -> Result<Outcome, String> {
    let factor = lib(shor_factor(n, seed))?;
    let report = json!({
        "N": n,
        "factor": factor.min(n / factor),
        "cofactor": factor.max(n / factor),
    });
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// ehk

pub fn ehk(
    group: &str,
    hidden: &str,
    m: usize,
    seed: u64,
    repetitions: u64,
) -> Result<Outcome, String> {
    let table = lib(FiniteGroupTable::bundled(group))?;
    let mut h: Vec<usize> = hidden
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad element index in --hidden: {tok}"))
        })
        .collect::<Result<_, _>>()?;
    h.sort_unstable();
    h.dedup();
    if !table.is_subgroup(&h) {
        return Err(format!("--hidden {hidden} is not a subgroup of {group}"));
    }
    let oracle = lib(TableCosetOracle::new(&table, h.clone()))?;

    let mut results = Vec::new();
    let mut successes = 0u64;
    for rep in 0..repetitions {
        let mut rng = trial_rng(seed, rep);
        let out = lib(ehk_run_with(&table, &oracle, m, &mut rng))?;
        let success = out.recovered == h;
        successes += success as u64;
        results.push(json!({
            "group": group,
            "hidden": h,
            "m": m,
            "recovered": out.recovered,
            "outcomes": out.outcomes,
            "implied": out.implied,
            "oracle_calls": out.oracle_calls,
            "success": success,
        }));
    }
    let report = if repetitions == 1 {
        results.pop().expect("one repetition ran")
    } else {
        let config = json!({
            "command": "ehk", "group": group, "hidden": h, "m": m,
            "seed": seed, "repetitions": repetitions,
        });
        envelope(config, results, successes)
    };
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// graph

pub fn graph_acount(input: &Path) -> Result<Outcome, String> {
    let g = lib(Graph::from_file(input))?;
    let oracle = IsoOracle::refinement();
    let count = lib(acount_via_iso(&g, &oracle))?;
    let report = json!({
        "vertices": g.n(),
        "edges": g.edge_count(),
        "automorphisms": count,
        "oracle_calls": oracle.calls(),
    });
    Ok(Outcome::json(report, false))
}

pub fn graph_iso(a: &Path, b: &Path, via: IsoVia) -> Result<Outcome, String> {
    let g1 = lib(Graph::from_file(a))?;
    let g2 = lib(Graph::from_file(b))?;
    let oracle = IsoOracle::refinement();
    let (via_name, isomorphic, map) = match via {
        IsoVia::Direct => {
            let map = lib(imap_via_iso(&g1, &g2, &oracle))?;
            ("direct", map.is_some(), map)
        }
        IsoVia::Acount => ("acount", lib(iso_via_acount(&g1, &g2, &oracle))?, None),
        IsoVia::Agen => ("agen", lib(iso_via_agen(&g1, &g2, &oracle))?, None),
        IsoVia::Apart => ("apart", lib(iso_via_apart(&g1, &g2, &oracle))?, None),
    };
    let report = json!({
        "via": via_name,
        "isomorphic": isomorphic,
        "map": map,
        "oracle_calls": oracle.calls(),
    });
    Ok(Outcome::json(report, false))
}

// ------------------------------------------------------------------
// bounds

/// `direction` is the guaranteed side: +1 when `empirical` may not
/// drop below the bound, -1 when it may not exceed it. Three sigmas
/// of slack keep honest statistical scatter from tripping exit 2.
fn trial_report_json(check: &str, report: &TrialReport, direction: f64, extra: Value) -> Value {
    let ok = direction * report.margin >= -3.0 * report.sigma();
    let mut v = json!({
        "check": check,
        "trials": report.trials,
        "successes": report.successes,
        "empirical": report.empirical,
        "bound": report.bound,
        "margin": report.margin,
        "sigma": report.sigma(),
        "seed": report.seed,
        "ok": ok,
    });
    if let (Value::Object(base), Value::Object(extra)) = (&mut v, extra) {
        base.extend(extra);
    }
    v
}

pub fn bounds_chernoff(eps: f64, n: u64, trials: u64, seed: u64) -> Result<Outcome, String> {
    let report = lib(chernoff_check(eps, n, trials, seed))?;
    let v = trial_report_json("chernoff", &report, -1.0, json!({"epsilon": eps, "n": n}));
    let ok = v["ok"].as_bool().unwrap_or(false);
    Ok(Outcome::json(v, !ok))
}

pub fn bounds_gcd(d: u64, k: u32, trials: u64, seed: u64) -> Result<Outcome, String> {
    let report = lib(gcd_probability_check(d, k, trials, seed))?;
    let v = trial_report_json("gcd", &report, 1.0, json!({"d": d, "k": k}));
    let ok = v["ok"].as_bool().unwrap_or(false);
    Ok(Outcome::json(v, !ok))
}

pub fn bounds_gen(group: &str, t: u32, trials: u64, seed: u64) -> Result<Outcome, String> {
    let report = lib(generation_probability_check(group, t, trials, seed))?;
    let v = trial_report_json("generation", &report, 1.0, json!({"group": group, "t": t}));
    let ok = v["ok"].as_bool().unwrap_or(false);
    Ok(Outcome::json(v, !ok))
}

pub fn bounds_totient(n: u64) -> Result<Outcome, String> {
    let check = lib(totient_sum_check(n))?;
    let ok = check.holds();
    let report = json!({
        "check": "totient",
        "n": check.n,
        "sum": check.sum,
        "deviation": check.deviation,
        "bound": check.bound,
        "ok": ok,
    });
    Ok(Outcome::json(report, !ok))
}
