//! Approximate QFT for odd moduli.
//!
//! The pipeline: lift a dimension-N state to L copies inside Z_M (both
//! L and M powers of two), Fourier transform with the exact circuit for
//! F_M, then split each index k by the integer "division with doubled
//! rounding" Δ into a quotient-like register s (which carries F_N u)
//! and a remainder register t. For suitably planned L and M the output
//! is within ε of F_N u ⊗ ψ for some unit ψ, and the measurement
//! distribution on s is within total variation 2ε + ε² of the true one.
//!
//! All Δ arithmetic is exact integer arithmetic; round(x) = ⌊x + 1/2⌋
//! (ties up) throughout.

use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;
use std::f64::consts::PI;

use super::circuit::{afft_circuit, exact_qft_circuit, ApproxQftParams};
use super::dense::dense_qft;
use crate::statevec::{root_of_unity, GateKind, GateSpec, RegisterLayout, StateVector, C_ZERO};
use crate::{rng, Error, Result};

/// round(a/b) for nonnegative integers, ties rounding up.
#[inline]
fn round_div(a: u64, b: u64) -> u64 {
    (2 * a + b) / (2 * b)
}

fn log2_exact(x: u64) -> usize {
    debug_assert!(x.is_power_of_two());
    x.trailing_zeros() as usize
}

fn ceil_log2(x: u64) -> usize {
    (64 - (x - 1).leading_zeros()) as usize
}

/// Smallest power of two ≥ x.
fn pow2_at_least(x: f64) -> u64 {
    let mut p = 1u64;
    while (p as f64) < x {
        p <<= 1;
    }
    p
}

/// Parameter bundle for one odd-modulus transform.
///
/// Auto-planned instances carry the target error and the dimensionless
/// constants c₁ = Lε²/√N and c₂ = Mε³/N^{3/2}; manually built ones
/// leave those `None` (the Δ invariants still hold, but no ε guarantee
/// is claimed).
#[derive(Debug, Clone, PartialEq)]
pub struct OddQftPlan {
    pub n: u64,
    pub epsilon: Option<f64>,
    pub l: u64,
    pub m: u64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub alpha: i64,
    pub beta: i64,
}

impl OddQftPlan {
    /// Total working-register width ⌈log M⌉ + 2.
    pub fn qubits(&self) -> usize {
        log2_exact(self.m) + 2
    }

    pub fn log_m(&self) -> usize {
        log2_exact(self.m)
    }

    pub fn log_l(&self) -> usize {
        log2_exact(self.l)
    }

    /// Width of the register holding s (⌈log N⌉ qubits).
    pub fn reg1_bits(&self) -> usize {
        ceil_log2(self.n)
    }

    /// Width of the register holding t + α.
    pub fn reg2_bits(&self) -> usize {
        self.qubits() - self.reg1_bits()
    }

    /// Upper bound ‖Σ_i û_i T^i‖ ≤ (2/π)·√(22·ln²N/L + 32·N²/(LM)) on
    /// the tail mass outside the bump intervals (natural log).
    pub fn tail_bound(&self) -> f64 {
        let n = self.n as f64;
        let l = self.l as f64;
        let m = self.m as f64;
        let ln_n = n.ln();
        (2.0 / PI) * (22.0 * ln_n * ln_n / l + 32.0 * n * n / (l * m)).sqrt()
    }

    /// Upper bound ‖S^i − B^i‖ ≤ πLN/(M√3) on the per-bump shift error.
    pub fn bump_bound(&self) -> f64 {
        PI * (self.l * self.n) as f64 / (self.m as f64 * 3.0f64.sqrt())
    }

    /// Qubit budget ⌈12.53 + 3·log₂(√N/ε)⌉ promised for auto plans.
    pub fn qubit_budget(&self) -> Option<usize> {
        self.epsilon.map(|eps| {
            let x = 12.53 + 3.0 * ((self.n as f64).sqrt() / eps).log2();
            x.ceil() as usize
        })
    }

    /// Builds a plan from explicit L and M, skipping the ε machinery.
    /// Useful for exploring the Δ invariants outside the theorem's
    /// hypothesis range.
    pub fn manual(n: u64, l: u64, m: u64) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::domain(format!("modulus must be odd and ≥ 3, got {n}")));
        }
        if !l.is_power_of_two() || !m.is_power_of_two() {
            return Err(Error::domain("L and M must be powers of two"));
        }
        if m <= 3 * n {
            return Err(Error::domain(format!("M must exceed 3N, got M={m}, N={n}")));
        }
        if l.checked_mul(n).map_or(true, |ln| ln > m) {
            return Err(Error::domain(format!("need L·N ≤ M, got L={l}, N={n}, M={m}")));
        }
        let (alpha, beta) = alpha_beta(m, n);
        Ok(OddQftPlan {
            n,
            epsilon: None,
            l,
            m,
            c1: None,
            c2: None,
            alpha,
            beta,
        })
    }
}

fn alpha_beta(m: u64, n: u64) -> (i64, i64) {
    // α = ⌊M/2N + 1/2⌋, β = ⌈M/2N − 3/2⌉ in integer arithmetic.
    let alpha = ((m + n) / (2 * n)) as i64;
    let beta = ((m - n - 1) / (2 * n)) as i64;
    (alpha, beta)
}

/// Picks L and M for the requested error: the unique powers of two
/// with c₁ = Lε²/√N ∈ [65, 130] and c₂ = Mε³/N^{3/2} ∈ [735, 1470].
pub fn plan_odd_qft(n: u64, epsilon: f64) -> Result<OddQftPlan> {
    if n % 2 == 0 || n < 13 {
        return Err(Error::domain(format!(
            "planned transform needs odd N ≥ 13, got {n} (use OddQftPlan::manual to explore smaller moduli)"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= std::f64::consts::SQRT_2 + 1e-12) {
        return Err(Error::domain(format!(
            "target error must satisfy 0 < ε ≤ √2, got {epsilon}"
        )));
    }
    let nf = n as f64;
    let l = pow2_at_least(65.0 * nf.sqrt() / (epsilon * epsilon));
    let m = pow2_at_least(735.0 * nf.powi(3).sqrt() / epsilon.powi(3));
    let c1 = l as f64 * epsilon * epsilon / nf.sqrt();
    let c2 = m as f64 * epsilon.powi(3) / nf.powi(3).sqrt();
    debug_assert!((65.0..=130.0).contains(&c1));
    debug_assert!((735.0..=1470.0).contains(&c2));
    if m < l * n {
        return Err(Error::domain(format!(
            "planner produced M={m} < LN={}",
            l * n
        )));
    }
    let (alpha, beta) = alpha_beta(m, n);
    let plan = OddQftPlan {
        n,
        epsilon: Some(epsilon),
        l,
        m,
        c1: Some(c1),
        c2: Some(c2),
        alpha,
        beta,
    };
    debug_assert!(plan.qubits() <= plan.qubit_budget().unwrap());
    Ok(plan)
}

/// The exact integer division map Δ|k⟩ = |s⟩|t⟩ for k ∈ {0,…,M−1}:
/// k′ = round(kN/M), t = k − round(k′M/N), s = k′ mod N. Carries the
/// per-s remainder sets C_s and the bump intervals (i), all validated
/// at build time.
#[derive(Debug, Clone)]
pub struct DeltaMap {
    m: u64,
    n: u64,
    alpha: i64,
    beta: i64,
    map: Vec<(u64, i64)>,
    c_sets: Vec<Vec<i64>>,
    i_primes: Vec<u64>,
    intervals: Vec<Vec<u64>>,
}

/// Builds and validates the Δ map. M > 3N keeps the bump intervals
/// from wrapping into each other.
pub fn delta_map_build(m: u64, n: u64) -> Result<DeltaMap> {
    if n == 0 || m == 0 {
        return Err(Error::domain("moduli must be positive"));
    }
    if m.gcd(&n) != 1 {
        return Err(Error::domain(format!("M={m} and N={n} share a factor")));
    }
    if m <= 3 * n {
        return Err(Error::domain(format!("need M > 3N, got M={m}, N={n}")));
    }
    let (alpha, beta) = alpha_beta(m, n);
    let invariant = |msg: String| Error::domain(format!("Δ invariant failed: {msg}"));
    if alpha != beta + 1 {
        return Err(invariant(format!("α={alpha} is not β+1 with β={beta}")));
    }

    let width = (2 * alpha + 1) as usize;
    let mut map = Vec::with_capacity(m as usize);
    let mut seen = vec![false; n as usize * width];
    let mut c_sets = vec![Vec::new(); n as usize];
    for k in 0..m {
        let kp = round_div(k * n, m);
        let t = k as i64 - round_div(kp * m, n) as i64;
        let s = kp % n;
        if t.abs() > alpha {
            return Err(invariant(format!("remainder t={t} escapes [−α, α] at k={k}")));
        }
        let slot = s as usize * width + (t + alpha) as usize;
        if seen[slot] {
            return Err(invariant(format!("image pair (s={s}, t={t}) repeats at k={k}")));
        }
        seen[slot] = true;
        map.push((s, t));
        c_sets[s as usize].push(t);
    }

    for (s, c) in c_sets.iter_mut().enumerate() {
        c.sort_unstable();
        c.dedup();
        let lo = *c.first().unwrap();
        let hi = *c.last().unwrap();
        if lo > -beta || hi < beta {
            return Err(invariant(format!("C_{s} misses part of {{−β,…,β}}")));
        }
        // Interior completeness: every t in [−β, β] occurs.
        for t in -beta..=beta {
            if c.binary_search(&t).is_err() {
                return Err(invariant(format!("C_{s} misses t={t}")));
            }
        }
        // δ_s = round(Ms/N) − Ms/N stays within half a unit.
        let e = n as i64 * round_div(m * s as u64, n) as i64 - (m * s as u64) as i64;
        if 2 * e.abs() > n as i64 {
            return Err(invariant(format!("|δ_{s}| exceeds 1/2")));
        }
    }

    // Bump intervals: radius-β windows around each i′ = round(Mi/N),
    // taken mod M; disjointness is the load-bearing property.
    let mut i_primes = Vec::with_capacity(n as usize);
    let mut intervals = Vec::with_capacity(n as usize);
    let mut occupied = vec![false; m as usize];
    for i in 0..n {
        let ip = round_div(m * i, n) % m;
        let members: Vec<u64> = (-beta..=beta)
            .map(|r| (ip as i64 + r).rem_euclid(m as i64) as u64)
            .collect();
        for &b in &members {
            if occupied[b as usize] {
                return Err(invariant(format!("intervals overlap at index {b}")));
            }
            occupied[b as usize] = true;
        }
        i_primes.push(ip);
        intervals.push(members);
    }

    Ok(DeltaMap {
        m,
        n,
        alpha,
        beta,
        map,
        c_sets,
        i_primes,
        intervals,
    })
}

impl DeltaMap {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    pub fn beta(&self) -> i64 {
        self.beta
    }

    /// Δ(k) = (s, t).
    pub fn image(&self, k: u64) -> (u64, i64) {
        self.map[k as usize]
    }

    /// The remainders observed for quotient s, sorted ascending.
    pub fn c_set(&self, s: u64) -> &[i64] {
        &self.c_sets[s as usize]
    }

    /// i′ = round(Mi/N).
    pub fn i_prime(&self, i: u64) -> u64 {
        self.i_primes[i as usize]
    }

    /// The bump interval (i): the 2β+1 integers within sawtooth
    /// distance < M/2N − 1/2 of i′, mod M.
    pub fn interval(&self, i: u64) -> &[u64] {
        &self.intervals[i as usize]
    }

    /// Λ: integers strictly inside (−⌊M/2N − 1/2⌋, ⌊M/2N − 1/2⌋).
    pub fn lambda(&self) -> Vec<i64> {
        (-(self.beta - 1)..=(self.beta - 1)).collect()
    }

    /// Exact numerator N·δ_s of the rounding offset δ_s.
    pub fn delta_numerator(&self, s: u64) -> i64 {
        self.n as i64 * round_div(self.m * s, self.n) as i64 - (self.m * s) as i64
    }

    pub fn delta_s(&self, s: u64) -> f64 {
        self.delta_numerator(s) as f64 / self.n as f64
    }

    /// Sawtooth distance |x|_M: distance from x to the nearest multiple
    /// of M.
    pub fn sawtooth(m: u64, x: i64) -> u64 {
        let r = x.rem_euclid(m as i64) as u64;
        r.min(m - r)
    }

    /// Extends Δ to a basis permutation of C^dim: k < M lands at
    /// s·2^{w2} + (t + α); remaining indices are matched up in order.
    pub fn to_basis_permutation(&self, dim: usize, w2: usize) -> Result<Vec<usize>> {
        if dim < self.m as usize {
            return Err(Error::DimMismatch(dim, self.m as usize));
        }
        let mut perm = vec![usize::MAX; dim];
        let mut used = vec![false; dim];
        for (k, &(s, t)) in self.map.iter().enumerate() {
            let slot = t + self.alpha;
            if slot < 0 || (slot as usize) >= (1usize << w2) {
                return Err(Error::capability(format!(
                    "offset register of {w2} qubits cannot hold t+α = {slot}"
                )));
            }
            let target = (s as usize) << w2 | slot as usize;
            if target >= dim || used[target] {
                return Err(Error::domain(format!(
                    "Δ image {target} collides while extending to a permutation"
                )));
            }
            perm[k] = target;
            used[target] = true;
        }
        let mut spare = (0..dim).filter(|&t| !used[t]);
        for p in perm.iter_mut().skip(self.m as usize) {
            *p = spare.next().expect("counting: dim − M spare targets");
        }
        Ok(perm)
    }
}

/// Which circuit realizes F_M inside the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FmKind {
    Exact,
    /// Truncated circuit with the given phase cutoff; adds its own
    /// 2π·log(M)·2^{−cutoff} to the error budget.
    Approx(usize),
}

/// A finished pipeline run: the output state, its two-register layout
/// (names "s" and "offset"), and the Δ map used.
#[derive(Debug, Clone)]
pub struct OddQftRun {
    pub state: StateVector,
    pub layout: RegisterLayout,
    pub plan: OddQftPlan,
    pub delta: DeltaMap,
}

/// Runs the transform with the exact F_M circuit.
pub fn run_odd_qft(u: &StateVector, plan: &OddQftPlan) -> Result<OddQftRun> {
    run_odd_qft_with(u, plan, FmKind::Exact)
}

/// Runs the four pipeline steps: F_L on the ancilla register, the
/// copy-reindex |i⟩|j⟩ → |i + jN⟩, F_M, and the Δ permutation.
pub fn run_odd_qft_with(u: &StateVector, plan: &OddQftPlan, fm: FmKind) -> Result<OddQftRun> {
    let n = plan.n as usize;
    if u.dim() != n {
        return Err(Error::DimMismatch(u.dim(), n));
    }
    let q = plan.qubits();
    let dim = 1usize << q;
    let r1 = plan.reg1_bits();
    let w2 = q - r1;
    let l = plan.l as usize;
    let m = plan.m as usize;
    let log_l = plan.log_l();
    debug_assert!(log_l <= w2 && l * n <= m);

    // |u⟩|0⟩ on the two registers.
    let mut amps = vec![C_ZERO; dim];
    for (i, &a) in u.amplitudes().iter().enumerate() {
        amps[i << w2] = a;
    }
    let mut state = StateVector::from_amplitudes(amps)?;

    // Step 1: F_L on the low ⌈log L⌉ qubits of the ancilla register.
    exact_qft_circuit(log_l)?.apply_shifted(&mut state, q - log_l)?;

    // Step 2: reindex |i⟩|j⟩ → |i + jN⟩, padded to a full permutation.
    let mut perm = vec![usize::MAX; dim];
    let mut is_source = vec![false; dim];
    let mut used = vec![false; dim];
    for i in 0..n {
        for j in 0..l {
            let src = i << w2 | j;
            let dst = i + j * n;
            perm[src] = dst;
            is_source[src] = true;
            used[dst] = true;
        }
    }
    check_support(&state, &is_source, "copy-reindex input")?;
    let mut spare = (0..dim).filter(|&t| !used[t]);
    for (src, p) in perm.iter_mut().enumerate() {
        if !is_source[src] {
            *p = spare.next().expect("counting: dim − LN spare targets");
        }
    }
    state.apply(&GateSpec::new(GateKind::PermutationOfBasis(perm), vec![]))?;

    // Step 3: F_M on the low ⌈log M⌉ qubits.
    let circuit = match fm {
        FmKind::Exact => exact_qft_circuit(plan.log_m())?,
        FmKind::Approx(cutoff) => afft_circuit(&ApproxQftParams::new(plan.log_m(), cutoff)?)?,
    };
    circuit.apply_shifted(&mut state, 2)?;

    // Step 4: Δ into (s, t+α).
    let mut in_zm = vec![false; dim];
    in_zm[..m].fill(true);
    check_support(&state, &in_zm, "Δ input")?;
    let delta = delta_map_build(plan.m, plan.n)?;
    let perm = delta.to_basis_permutation(dim, w2)?;
    state.apply(&GateSpec::new(GateKind::PermutationOfBasis(perm), vec![]))?;

    let layout = RegisterLayout::new(vec![("s", 0..r1), ("offset", r1..q)])?;
    Ok(OddQftRun {
        state,
        layout,
        plan: plan.clone(),
        delta,
    })
}

fn check_support(state: &StateVector, allowed: &[bool], stage: &str) -> Result<()> {
    for (i, a) in state.amplitudes().iter().enumerate() {
        if !allowed[i] && a.norm_sqr() > 1e-24 {
            return Err(Error::domain(format!(
                "unexpected amplitude at basis index {i} entering {stage}"
            )));
        }
    }
    Ok(())
}

/// Numeric quality report for one run against one input.
#[derive(Debug, Clone)]
pub struct OddQftReport {
    pub n: u64,
    pub epsilon: Option<f64>,
    pub l: u64,
    pub m: u64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub qubits: usize,
    /// ‖v − F_N u ⊗ ψ*‖ for the least-squares optimal unit ψ*.
    pub residual: f64,
    /// Same residual with the fixed reference factor ψ ∝ Σ_{t∈Λ} A⁰_t|t+α⟩.
    pub residual_lambda: f64,
    /// Σ_s | D_v(s) − D(s) | between the s-register distribution and
    /// the true |F_N u|² distribution.
    pub tv_distance: f64,
    pub tail_bound: f64,
    pub bump_bound: f64,
}

impl OddQftReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "epsilon": self.epsilon,
            "L": self.l,
            "M": self.m,
            "c1": self.c1,
            "c2": self.c2,
            "qubits": self.qubits,
            "residual": self.residual,
            "residual_lambda": self.residual_lambda,
            "tv_distance": self.tv_distance,
            "tail_bound": self.tail_bound,
            "bump_bound": self.bump_bound,
        })
    }
}

/// A⁰ = F_M applied to the uniform superposition over {0,…,LN−1}.
pub(crate) fn a0_vector(plan: &OddQftPlan) -> Result<Vec<Complex64>> {
    let ln = (plan.l * plan.n) as usize;
    let support: Vec<usize> = (0..ln).collect();
    let mut x = StateVector::uniform_over(plan.m as usize, &support)?;
    exact_qft_circuit(plan.log_m())?.apply_to(&mut x)?;
    Ok(x.amplitudes().to_vec())
}

/// The reference tensor factor on the offset register: amplitudes
/// A⁰_t at |t+α⟩ for t ∈ Λ, normalized.
pub(crate) fn psi_lambda_on_offset(
    a0: &[Complex64],
    delta: &DeltaMap,
    w2: usize,
) -> Vec<Complex64> {
    let m = delta.m() as i64;
    let mut psi = vec![C_ZERO; 1 << w2];
    for t in delta.lambda() {
        psi[(t + delta.alpha()) as usize] = a0[t.rem_euclid(m) as usize];
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut psi {
        *a /= norm;
    }
    psi
}

/// Compares a finished run against the true transform of `u`: residuals
/// under the optimal and the reference tensor factors, plus the total
/// variation between the s-register and true output distributions.
pub fn analyze_odd_qft(u: &StateVector, run: &OddQftRun) -> Result<OddQftReport> {
    let plan = &run.plan;
    let n = plan.n as usize;
    if u.dim() != n {
        return Err(Error::DimMismatch(u.dim(), n));
    }
    let q = plan.qubits();
    let r1 = plan.reg1_bits();
    let w2 = q - r1;
    let block = 1usize << w2;
    let blocks = 1usize << r1;
    let v = run.state.amplitudes();

    let u_hat = dense_qft(n)?.apply(u)?;
    let u_hat = u_hat.amplitudes();

    // Least-squares tensor factor: ψ* ∝ Σ_s conj(û_s) · v[s, ·].
    let mut psi_star = vec![C_ZERO; block];
    for s in 0..n {
        let base = s << w2;
        let c = u_hat[s].conj();
        for w in 0..block {
            psi_star[w] += c * v[base + w];
        }
    }
    let norm = psi_star.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut psi_star {
        *a /= norm;
    }

    let a0 = a0_vector(plan)?;
    let psi_lambda = psi_lambda_on_offset(&a0, &run.delta, w2);

    let residual_against = |psi: &[Complex64]| -> f64 {
        let mut acc = 0.0;
        for s in 0..blocks {
            let base = s << w2;
            let us = if s < n { u_hat[s] } else { C_ZERO };
            for w in 0..block {
                acc += (v[base + w] - us * psi[w]).norm_sqr();
            }
        }
        acc.sqrt()
    };

    // Total variation between the induced s distribution and |û|².
    let mut tv = 0.0;
    for s in 0..blocks {
        let base = s << w2;
        let dv: f64 = (0..block).map(|w| v[base + w].norm_sqr()).sum();
        let d = if s < n { u_hat[s].norm_sqr() } else { 0.0 };
        tv += (dv - d).abs();
    }

    Ok(OddQftReport {
        n: plan.n,
        epsilon: plan.epsilon,
        l: plan.l,
        m: plan.m,
        c1: plan.c1,
        c2: plan.c2,
        qubits: q,
        residual: residual_against(&psi_star),
        residual_lambda: residual_against(&psi_lambda),
        tv_distance: tv,
        tail_bound: plan.tail_bound(),
        bump_bound: plan.bump_bound(),
    })
}

/// Cap on dense diagnostics: the A^i table is N·M complex entries.
const DIAGNOSTICS_M_CAP: u64 = 1 << 20;

/// The Appendix-style diagnostic vectors, computed densely:
/// A^i = F_M F_{LN}^{-1}|Li⟩, its bump part B^i (restriction to the
/// interval (i)), tail part T^i = A^i − B^i, and the shifted bumps S^i.
#[derive(Debug, Clone)]
pub struct OddQftDiagnostics {
    plan: OddQftPlan,
    delta: DeltaMap,
    a: Vec<Vec<Complex64>>,
}

/// Builds the diagnostic vectors and eagerly verifies the two error
/// lemmas they witness: every ‖S^i − B^i‖ ≤ πLN/(M√3), and the tail
/// norm ‖Σ_i û_i T^i‖ stays within the tail bound for a spread of unit
/// û (each basis vector, the uniform vector, and a seeded random one).
pub fn odd_qft_diagnostics(plan: &OddQftPlan) -> Result<OddQftDiagnostics> {
    if plan.m > DIAGNOSTICS_M_CAP {
        return Err(Error::capability(format!(
            "dense diagnostics capped at M = 2^20, got M = {}",
            plan.m
        )));
    }
    let n = plan.n as usize;
    let m = plan.m as usize;
    let ln = (plan.l * plan.n) as usize;
    let delta = delta_map_build(plan.m, plan.n)?;
    let circuit = exact_qft_circuit(plan.log_m())?;

    // F_{LN}^{-1}|Li⟩ has amplitude ω_N^{-ai}/√(LN) at a < LN.
    let mut a = Vec::with_capacity(n);
    let scale = 1.0 / (ln as f64).sqrt();
    for i in 0..n {
        let mut x = vec![C_ZERO; m];
        for (idx, slot) in x.iter_mut().enumerate().take(ln) {
            let e = (idx as u64 * i as u64 % plan.n) as i64;
            *slot = root_of_unity(-e, plan.n) * scale;
        }
        let mut s = StateVector::from_amplitudes(x)?;
        circuit.apply_to(&mut s)?;
        a.push(s.amplitudes().to_vec());
    }

    let diag = OddQftDiagnostics {
        plan: plan.clone(),
        delta,
        a,
    };

    let bump = diag.plan.bump_bound();
    let worst = diag.max_bump_distance();
    if worst > bump + 1e-9 {
        return Err(Error::domain(format!(
            "bump shift distance {worst:.6} exceeds its bound {bump:.6}"
        )));
    }
    if diag.tail_hypotheses_hold() {
        let tail = diag.plan.tail_bound();
        let mut trials: Vec<Vec<Complex64>> = Vec::new();
        for i in 0..n {
            let mut e = vec![C_ZERO; n];
            e[i] = Complex64::new(1.0, 0.0);
            trials.push(e);
        }
        trials.push(vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n]);
        trials.push(random_unit(n, 0xD1A6));
        for u_hat in &trials {
            let t = diag.tail_norm_for(u_hat)?;
            if t > tail + 1e-9 {
                return Err(Error::domain(format!(
                    "tail norm {t:.6} exceeds its bound {tail:.6}"
                )));
            }
        }
    }
    Ok(diag)
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng::master_rng(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

impl OddQftDiagnostics {
    pub fn plan(&self) -> &OddQftPlan {
        &self.plan
    }

    pub fn delta(&self) -> &DeltaMap {
        &self.delta
    }

    /// Whether the tail lemma's hypotheses (odd N ≥ 13, L ≥ 2,
    /// M ≥ 16N) hold for this plan.
    pub fn tail_hypotheses_hold(&self) -> bool {
        self.plan.n >= 13 && self.plan.l >= 2 && self.plan.m >= 16 * self.plan.n
    }

    pub fn a_vec(&self, i: u64) -> &[Complex64] {
        &self.a[i as usize]
    }

    /// A^i restricted to the interval (i).
    pub fn b_vec(&self, i: u64) -> Vec<Complex64> {
        let mut b = vec![C_ZERO; self.plan.m as usize];
        for &idx in self.delta.interval(i) {
            b[idx as usize] = self.a[i as usize][idx as usize];
        }
        b
    }

    /// A^i minus its bump part.
    pub fn t_vec(&self, i: u64) -> Vec<Complex64> {
        let mut t = self.a[i as usize].clone();
        for &idx in self.delta.interval(i) {
            t[idx as usize] = C_ZERO;
        }
        t
    }

    /// S^i: the bump of A⁰ translated by i′ (mod M).
    pub fn s_vec(&self, i: u64) -> Vec<Complex64> {
        let m = self.plan.m;
        let ip = self.delta.i_prime(i);
        let mut s = vec![C_ZERO; m as usize];
        for &b in self.delta.interval(0) {
            s[((b + ip) % m) as usize] = self.a[0][b as usize];
        }
        s
    }

    /// max_i ‖S^i − B^i‖.
    pub fn max_bump_distance(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.plan.n {
            let b = self.b_vec(i);
            let s = self.s_vec(i);
            let d2: f64 = b
                .iter()
                .zip(&s)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum();
            worst = worst.max(d2.sqrt());
        }
        worst
    }

    /// ‖Σ_i û_i T^i‖ for a given coefficient vector.
    pub fn tail_norm_for(&self, u_hat: &[Complex64]) -> Result<f64> {
        let n = self.plan.n as usize;
        if u_hat.len() != n {
            return Err(Error::DimMismatch(u_hat.len(), n));
        }
        let m = self.plan.m as usize;
        let mut acc = vec![C_ZERO; m];
        for i in 0..n {
            let t = self.t_vec(i as u64);
            for (slot, x) in acc.iter_mut().zip(&t) {
                *slot += u_hat[i] * x;
            }
        }
        Ok(acc.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
    }

    /// The normalized reference factor ψ on the offset register.
    pub fn psi_lambda(&self, w2: usize) -> Vec<Complex64> {
        psi_lambda_on_offset(&self.a[0], &self.delta, w2)
    }
}
