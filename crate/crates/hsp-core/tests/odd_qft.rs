mod common;

use common::*;
use hsp_core::qft::*;
use hsp_core::statevec::{basis_state, state_distance, StateVector, C_ZERO};
use hsp_core::{rng, Error};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// -------------------------------------------------------------- planning

#[test]
fn plan_for_thirteen_at_unit_error() {
    let plan = plan_odd_qft(13, 1.0).unwrap();
    assert_eq!(plan.l, 256);
    assert_eq!(plan.m, 65536);
    assert!((plan.c1.unwrap() - 71.0).abs() < 0.1);
    assert!((plan.c2.unwrap() - 1398.1).abs() < 0.5);
    assert_eq!(plan.qubits(), 18);
    assert!(plan.qubits() <= plan.qubit_budget().unwrap());
    assert_eq!(plan.qubit_budget().unwrap(), 19);
}

#[test]
fn plan_constants_land_in_their_windows() {
    // Oracle: recompute the window edges from scratch for each point.
    for n in [13u64, 15, 17, 21, 55, 99] {
        for eps in [0.5f64, 0.75, 1.0, 1.25, SQRT_2] {
            let plan = plan_odd_qft(n, eps).unwrap();
            let c1 = plan.l as f64 * eps * eps / (n as f64).sqrt();
            let c2 = plan.m as f64 * eps.powi(3) / (n as f64).powi(3).sqrt();
            assert!((65.0..=130.0).contains(&c1), "N={n} eps={eps}: c1={c1}");
            assert!((735.0..=1470.0).contains(&c2), "N={n} eps={eps}: c2={c2}");
            assert!((plan.c1.unwrap() - c1).abs() < 1e-9);
            assert!((plan.c2.unwrap() - c2).abs() < 1e-9);
            assert!(plan.l.is_power_of_two() && plan.m.is_power_of_two());
            assert!(plan.m >= plan.l * plan.n);
            assert_eq!(plan.alpha, plan.beta + 1);
            assert!(plan.qubits() <= plan.qubit_budget().unwrap());
            // the window [lower, 2·lower) contains exactly this power of two
            let lower_l = 65.0 * (n as f64).sqrt() / (eps * eps);
            assert!(plan.l as f64 >= lower_l && (plan.l as f64) < 2.0 * lower_l);
            let lower_m = 735.0 * (n as f64).powi(3).sqrt() / eps.powi(3);
            assert!(plan.m as f64 >= lower_m && (plan.m as f64) < 2.0 * lower_m);
        }
    }
}

#[test]
fn plan_at_hypothesis_boundary() {
    let plan = plan_odd_qft(13, SQRT_2).unwrap();
    assert!(plan.c1.unwrap() >= 65.0 && plan.c2.unwrap() >= 735.0);
    // √2 is the loosest target, so this is the smallest 13-plan.
    for eps in [1.0, 0.7, 0.5] {
        let tighter = plan_odd_qft(13, eps).unwrap();
        assert!(tighter.l >= plan.l && tighter.m >= plan.m);
    }
}

#[test]
fn plan_for_fifty_five_at_sqrt_two() {
    let plan = plan_odd_qft(55, SQRT_2).unwrap();
    assert!((65.0..=130.0).contains(&plan.c1.unwrap()));
    assert!((735.0..=1470.0).contains(&plan.c2.unwrap()));
}

#[test]
fn plan_rejects_bad_hypotheses() {
    assert!(plan_odd_qft(12, 1.0).is_err());
    assert!(plan_odd_qft(11, 1.0).is_err());
    assert!(plan_odd_qft(15, 0.0).is_err());
    assert!(plan_odd_qft(15, -1.0).is_err());
    assert!(plan_odd_qft(15, 1.5).is_err());
}

#[test]
fn manual_plan_validates_inputs() {
    assert!(OddQftPlan::manual(15, 64, 4096).is_ok());
    assert!(OddQftPlan::manual(14, 64, 4096).is_err()); // even
    assert!(OddQftPlan::manual(15, 60, 4096).is_err()); // L not a power of two
    assert!(OddQftPlan::manual(15, 64, 40).is_err()); // M ≤ 3N
    assert!(OddQftPlan::manual(15, 512, 4096).is_err()); // LN > M
}

// --------------------------------------------------------------- Δ map

/// Independent oracle for Δ: floating-point round-half-up. Safe here
/// because kN/M is dyadic (M a power of two) and k′M/N can never tie
/// (2k′M is even, N odd).
fn delta_oracle(m: u64, n: u64, k: u64) -> (u64, i64) {
    let kp = ((k * n) as f64 / m as f64 + 0.5).floor() as u64;
    let t = k as i64 - ((kp * m) as f64 / n as f64 + 0.5).floor() as i64;
    (kp % n, t)
}

#[test]
fn delta_32_5_exhaustive() {
    let d = delta_map_build(32, 5).unwrap();
    assert_eq!(d.alpha(), 3);
    assert_eq!(d.beta(), 2);
    assert_eq!(d.alpha(), d.beta() + 1);
    let mut seen = std::collections::HashSet::new();
    for k in 0..32 {
        let (s, t) = d.image(k);
        assert_eq!((s, t), delta_oracle(32, 5, k), "k={k}");
        assert!(seen.insert((s, t)), "Δ repeats ({s},{t})");
        assert!(t.abs() <= d.alpha());
    }
}

#[test]
fn delta_16_5_sends_zero_to_zero() {
    let d = delta_map_build(16, 5).unwrap();
    assert_eq!(d.image(0), (0, 0));
}

#[test]
fn delta_65536_13_interval_structure() {
    let d = delta_map_build(65536, 13).unwrap();
    let card = d.interval(0).len();
    assert_eq!(card, (2 * d.beta() + 1) as usize);
    let mut occupied = vec![false; 65536];
    for i in 0..13 {
        assert_eq!(d.interval(i).len(), card, "interval ({i}) cardinality");
        for &b in d.interval(i) {
            assert!(!occupied[b as usize], "intervals overlap at {b}");
            occupied[b as usize] = true;
        }
    }
}

#[test]
fn interval_membership_matches_sawtooth_definition() {
    // Oracle: j ∈ (i) iff the sawtooth distance |j − i′|_M is strictly
    // below M/2N − 1/2, i.e. 2N·|j − i′|_M < M − N.
    for (m, n) in [(32u64, 5u64), (4096, 15), (65536, 13)] {
        let d = delta_map_build(m, n).unwrap();
        let mut member = vec![u64::MAX; m as usize];
        for i in 0..n {
            for &b in d.interval(i) {
                member[b as usize] = i;
            }
        }
        for i in 0..n {
            let ip = d.i_prime(i) as i64;
            for j in 0..m {
                let by_def = 2 * n * DeltaMap::sawtooth(m, j as i64 - ip) < m - n;
                assert_eq!(
                    member[j as usize] == i,
                    by_def,
                    "M={m} N={n} i={i} j={j}"
                );
            }
        }
    }
}

#[test]
fn c_sets_are_sandwiched() {
    for (m, n) in [(32u64, 5u64), (1024, 13), (4096, 15)] {
        let d = delta_map_build(m, n).unwrap();
        for s in 0..n {
            let cs = d.c_set(s);
            for t in -d.beta()..=d.beta() {
                assert!(cs.contains(&t), "C_{s} misses {t} (M={m}, N={n})");
            }
            for &t in cs {
                assert!(t.abs() <= d.alpha());
            }
        }
    }
}

#[test]
fn delta_offsets_stay_within_half() {
    for (m, n) in [(32u64, 5u64), (1024, 13), (65536, 13)] {
        let d = delta_map_build(m, n).unwrap();
        for s in 0..n {
            assert!(d.delta_s(s).abs() <= 0.5 + 1e-15);
            assert_eq!(d.delta_numerator(s) as f64 / n as f64, d.delta_s(s));
        }
    }
}

#[test]
fn lambda_is_the_open_interval() {
    for (m, n) in [(32u64, 5u64), (1024, 13)] {
        let d = delta_map_build(m, n).unwrap();
        // Oracle: radius ⌊M/2N − 1/2⌋, endpoints excluded.
        let w = ((m as f64) / (2.0 * n as f64) - 0.5).floor() as i64;
        let expect: Vec<i64> = (-(w - 1)..=(w - 1)).collect();
        assert_eq!(d.lambda(), expect);
        assert_eq!(d.lambda().len() as i64, 2 * d.beta() - 1);
    }
}

#[test]
fn delta_invariants_hold_across_the_grid() {
    // delta_map_build checks every invariant eagerly; sweep the stated
    // grid and spot-check images against the independent oracle.
    let mut built = 0;
    for a in 4..=12u32 {
        let m = 1u64 << a;
        for n in (5..=99u64).step_by(2) {
            if m <= 3 * n {
                continue;
            }
            let d = delta_map_build(m, n).unwrap();
            built += 1;
            for k in [0, 1, m / 3, m / 2, m - 1] {
                assert_eq!(d.image(k), delta_oracle(m, n, k), "M={m} N={n} k={k}");
            }
        }
    }
    assert!(built > 200, "grid unexpectedly small: {built}");
}

#[test]
fn delta_rejects_bad_moduli() {
    assert!(matches!(delta_map_build(32, 4), Err(Error::Domain(_)))); // shared factor
    assert!(delta_map_build(16, 7).is_err()); // M ≤ 3N
    assert!(delta_map_build(0, 5).is_err());
}

// ------------------------------------------------------------ diagnostics

#[test]
fn bump_shift_vanishes_at_zero() {
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    let b0 = diag.b_vec(0);
    let s0 = diag.s_vec(0);
    assert_eq!(vec_distance(&b0, &s0), 0.0);
}

#[test]
fn bump_shift_bound_at_13_16_1024() {
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    let bound = plan.bump_bound();
    assert!((bound - 0.3684).abs() < 5e-4);
    assert!(diag.max_bump_distance() <= bound);
}

#[test]
fn diagnostic_vectors_decompose_exactly() {
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    for i in 0..13u64 {
        let a = diag.a_vec(i);
        let b = diag.b_vec(i);
        let t = diag.t_vec(i);
        for k in 0..1024usize {
            assert_eq!(a[k], b[k] + t[k], "i={i} k={k}");
        }
        // the two parts live on complementary supports
        for k in 0..1024usize {
            assert!(b[k] == C_ZERO || t[k] == C_ZERO);
        }
    }
}

#[test]
fn shifted_bumps_have_disjoint_support() {
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    let supports: Vec<Vec<usize>> = (0..13u64)
        .map(|i| {
            diag.s_vec(i)
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    for i in 0..13 {
        // supp(S^i) is exactly the interval (i)
        let mut interval: Vec<usize> = diag
            .delta()
            .interval(i as u64)
            .iter()
            .map(|&b| b as usize)
            .collect();
        interval.sort_unstable();
        let mut sup = supports[i].clone();
        sup.sort_unstable();
        assert!(sup.iter().all(|k| interval.contains(k)));
        for j in 0..i {
            assert!(
                supports[i].iter().all(|k| !supports[j].contains(k)),
                "S^{i} and S^{j} overlap"
            );
        }
    }
}

#[test]
fn a_vectors_are_the_transform_of_the_lifted_basis() {
    // Oracle: A^i_k = (1/√(LMN)) Σ_{a<LN} ω_N^{-ai} ω_M^{ak}, summed
    // directly.
    let plan = OddQftPlan::manual(5, 8, 128).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    let (l, m, n) = (8u64, 128u64, 5u64);
    let scale = 1.0 / ((l * m * n) as f64).sqrt();
    for i in 0..n {
        let a = diag.a_vec(i);
        for k in 0..m {
            let mut acc = c(0.0, 0.0);
            for aa in 0..(l * n) {
                let phase = -2.0 * std::f64::consts::PI * (aa * i) as f64 / n as f64
                    + 2.0 * std::f64::consts::PI * (aa * k) as f64 / m as f64;
                acc += c(phase.cos(), phase.sin());
            }
            acc *= scale;
            assert!((a[k as usize] - acc).norm() < 1e-9, "i={i} k={k}");
        }
    }
}

#[test]
fn tail_norm_respects_bound_for_random_coefficients() {
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    assert!(diag.tail_hypotheses_hold());
    let bound = plan.tail_bound();
    for seed in 0..20u64 {
        let mut r = rng::master_rng(seed);
        let u_hat = random_unit_vec(13, &mut r);
        let t = diag.tail_norm_for(&u_hat).unwrap();
        assert!(t <= bound, "seed {seed}: {t} > {bound}");
    }
}

#[test]
fn diagnostics_respect_dense_cap() {
    let plan = OddQftPlan::manual(13, 4096, 1 << 21).unwrap();
    assert!(matches!(
        odd_qft_diagnostics(&plan),
        Err(Error::Capability(_))
    ));
}

// ------------------------------------------------------------- pipeline

#[test]
fn lifted_state_transforms_into_u_hat_weighted_bumps() {
    // The algebraic spine of the construction: F_M u_L = Σ_s û_s A^s.
    let plan = OddQftPlan::manual(13, 16, 1024).unwrap();
    let diag = odd_qft_diagnostics(&plan).unwrap();
    let u = random_state(13, 21);
    let u_hat = dense_qft(13).unwrap().apply(&u).unwrap();
    // Build u_L = (1/√L) Σ_{i,j} u_i |i + jN⟩ and transform it.
    let mut ul = vec![C_ZERO; 1024];
    let scale = 1.0 / 4.0;
    for (i, &a) in u.amplitudes().iter().enumerate() {
        for j in 0..16usize {
            ul[i + 13 * j] = a * scale;
        }
    }
    let mut state = StateVector::from_amplitudes(ul).unwrap();
    exact_qft_circuit(10).unwrap().apply_to(&mut state).unwrap();
    let mut expect = vec![C_ZERO; 1024];
    for s in 0..13u64 {
        let a = diag.a_vec(s);
        for k in 0..1024usize {
            expect[k] += u_hat.amplitudes()[s as usize] * a[k];
        }
    }
    assert!(vec_distance(state.amplitudes(), &expect) < 1e-9);
}

#[test]
fn run_on_basis_zero_with_unit_error() {
    let plan = plan_odd_qft(13, 1.0).unwrap();
    let u = basis_state(13, 0).unwrap();
    let run = run_odd_qft(&u, &plan).unwrap();
    assert_eq!(run.state.qubit_count(), 18);
    assert_eq!(run.layout.range_of("s"), Some(0..4));
    assert_eq!(run.layout.range_of("offset"), Some(4..18));
    assert!((run.state.norm() - 1.0).abs() < 1e-9);
    let report = analyze_odd_qft(&u, &run).unwrap();
    assert!(report.residual <= 1.0, "residual {}", report.residual);
    assert!(report.residual <= report.residual_lambda + 1e-12);
}

#[test]
fn run_on_random_state_meets_both_guarantees() {
    let plan = plan_odd_qft(13, 1.0).unwrap();
    let u = random_state(13, 5);
    let run = run_odd_qft(&u, &plan).unwrap();
    let report = analyze_odd_qft(&u, &run).unwrap();
    assert!(report.residual <= 1.0);
    // distribution guarantee: TV ≤ 2ε + ε²
    assert!(report.tv_distance <= 2.0 + 1.0);
    // and the sharper data-processing form with the measured residual
    let r = report.residual;
    assert!(report.tv_distance <= 2.0 * r + r * r + 1e-9);
}

#[test]
fn manual_fifteen_run_keeps_invariants_without_guarantee() {
    let plan = OddQftPlan::manual(15, 64, 4096).unwrap();
    let u = random_state(15, 8);
    let run = run_odd_qft(&u, &plan).unwrap();
    assert!((run.state.norm() - 1.0).abs() < 1e-9);
    assert_eq!(run.plan.epsilon, None);
    assert_eq!(run.state.qubit_count(), plan.qubits());
    let report = analyze_odd_qft(&u, &run).unwrap();
    // no ε is claimed, but the report is still well formed
    assert!(report.residual.is_finite() && report.residual >= 0.0);
    assert!(report.tv_distance <= 2.0);
}

#[test]
fn planned_points_meet_epsilon_residual() {
    for (n, eps) in [(13u64, 1.4f64), (17, 1.4), (13, 1.0)] {
        let plan = plan_odd_qft(n, eps).unwrap();
        for seed in [0u64, 1] {
            let u = random_state(n as usize, seed);
            let run = run_odd_qft(&u, &plan).unwrap();
            let report = analyze_odd_qft(&u, &run).unwrap();
            assert!(
                report.residual <= eps,
                "N={n} eps={eps} seed={seed}: residual {}",
                report.residual
            );
            assert!(report.tv_distance <= 2.0 * eps + eps * eps);
        }
    }
}

#[test]
fn approximate_fm_adds_its_own_budget() {
    let plan = plan_odd_qft(13, 1.0).unwrap();
    let u = random_state(13, 3);
    let cutoff = 8usize;
    let run = run_odd_qft_with(&u, &plan, FmKind::Approx(cutoff)).unwrap();
    let report = analyze_odd_qft(&u, &run).unwrap();
    let afft_budget = 2.0 * std::f64::consts::PI * plan.log_m() as f64 / (1u64 << cutoff) as f64;
    assert!(
        report.residual <= 1.0 + afft_budget,
        "residual {} vs 1 + {afft_budget}",
        report.residual
    );
}

#[test]
fn run_rejects_dimension_mismatch() {
    let plan = plan_odd_qft(13, 1.0).unwrap();
    let u = basis_state(15, 0).unwrap();
    assert!(matches!(
        run_odd_qft(&u, &plan),
        Err(Error::DimMismatch(15, 13))
    ));
}

// --------------------------------------------------- unit-triangle lemma

#[test]
fn renormalizing_costs_at_most_sqrt_two() {
    // For unit a and any b with ‖a − b‖ = ε ≤ 1, the normalized b stays
    // within ε√2 of a. 10⁴ seeded samples across dimensions.
    let mut checked = 0u32;
    for trial in 0..10_000u64 {
        let mut r = rng::trial_rng(0xA11CE, trial);
        let dim = 2 + (trial % 63) as usize;
        let a = random_unit_vec(dim, &mut r);
        let eps = (trial % 100) as f64 / 100.0;
        // arbitrary (not necessarily unit) b at exact distance ε
        let dir = random_unit_vec(dim, &mut r);
        let b: Vec<Complex64> = a
            .iter()
            .zip(&dir)
            .map(|(x, d)| x + d * eps)
            .collect();
        let bnorm = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if bnorm < 1e-12 {
            continue;
        }
        let bn: Vec<Complex64> = b.iter().map(|x| x / bnorm).collect();
        let d = vec_distance(&a, &bn);
        assert!(
            d <= eps * SQRT_2 + 1e-12,
            "trial {trial}: ‖a − b/‖b‖‖ = {d} > {eps}·√2"
        );
        checked += 1;
    }
    assert!(checked > 9_900);
}

// --------------------------------------------------------------- bounds

#[test]
fn tail_and_bump_bounds_shrink_with_larger_m() {
    let small = OddQftPlan::manual(13, 16, 1024).unwrap();
    let large = OddQftPlan::manual(13, 16, 8192).unwrap();
    assert!(large.bump_bound() < small.bump_bound());
    assert!(large.tail_bound() < small.tail_bound());
}

#[test]
fn planned_bounds_imply_the_epsilon_claim() {
    // √2·(tail + bump) ≤ ε certifies the residual guarantee.
    for (n, eps) in [(13u64, 1.0f64), (21, 0.5), (55, SQRT_2), (99, 0.75)] {
        let plan = plan_odd_qft(n, eps).unwrap();
        let total = SQRT_2 * (plan.tail_bound() + plan.bump_bound());
        assert!(total <= eps, "N={n} ε={eps}: {total}");
    }
}

#[test]
fn state_distance_report_consistency() {
    // residual via ψ* is never worse than via the reference ψ_Λ.
    let plan = OddQftPlan::manual(13, 32, 2048).unwrap();
    let u = random_state(13, 13);
    let run = run_odd_qft(&u, &plan).unwrap();
    let report = analyze_odd_qft(&u, &run).unwrap();
    assert!(report.residual <= report.residual_lambda + 1e-12);
    // sanity: the state the run returns really is a state
    assert!((run.state.norm() - 1.0).abs() < 1e-9);
    assert!(state_distance(&run.state, &run.state).unwrap() == 0.0);
}
