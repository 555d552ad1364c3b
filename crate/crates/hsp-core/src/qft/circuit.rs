//! Circuit-level transforms: the exact power-of-two QFT, its truncated
//! approximation, and the coprime-factor composition for split moduli.
//!
//! Circuit qubit 0 holds the most significant bit of the index, so for
//! the QFT input j = j₁j₂…j_n (binary) qubit a-1 carries j_a.

use ndarray::Array2;
use num_complex::Complex64;
use num_integer::Integer;
use std::f64::consts::PI;

use super::dense::{dense_qft, CyclicQftMatrix, DENSE_DIM_CAP};
use crate::statevec::{GateKind, GateSpec, StateVector, C_ZERO};
use crate::{Error, Result};

/// Qubit ceiling for circuit synthesis; 2^24 amplitudes is already
/// beyond the acceptance workloads.
const MAX_CIRCUIT_QUBITS: usize = 24;

#[derive(Debug, Clone)]
pub struct QftCircuit {
    n: usize,
    ops: Vec<GateSpec>,
}

impl QftCircuit {
    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[GateSpec] {
        &self.ops
    }

    /// Number of gates.
    pub fn size(&self) -> usize {
        self.ops.len()
    }

    /// Parallel depth under the greedy partition: each op lands on the
    /// earliest layer after the last layer touching any of its qubits.
    pub fn depth(&self) -> usize {
        let mut last = vec![0usize; self.n];
        let mut depth = 0;
        for op in &self.ops {
            let level = 1 + op.targets.iter().map(|&q| last[q]).max().unwrap_or(depth);
            for &q in &op.targets {
                last[q] = level;
            }
            depth = depth.max(level);
        }
        depth
    }

    /// Applies the circuit to a 2^n-dimensional state.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.dim() != 1usize << self.n {
            return Err(Error::DimMismatch(state.dim(), 1usize << self.n));
        }
        for op in &self.ops {
            state.apply(op)?;
        }
        Ok(())
    }

    /// Applies the circuit inside a larger state, with circuit qubit q
    /// acting on state qubit `offset + q`.
    pub fn apply_shifted(&self, state: &mut StateVector, offset: usize) -> Result<()> {
        if !state.is_qubit_addressed() {
            return Err(Error::NotQubitAddressed(state.dim()));
        }
        if offset + self.n > state.qubit_count() {
            return Err(Error::BadTargets(format!(
                "circuit on {} qubits at offset {} exceeds a {}-qubit state",
                self.n,
                offset,
                state.qubit_count()
            )));
        }
        for op in &self.ops {
            let shifted = GateSpec::new(
                op.kind.clone(),
                op.targets.iter().map(|&q| q + offset).collect(),
            );
            state.apply(&shifted)?;
        }
        Ok(())
    }

    /// Materializes the circuit's unitary column by column.
    pub fn unitary(&self) -> Result<Array2<Complex64>> {
        if self.n > 11 {
            return Err(Error::capability(
                "dense circuit unitary capped at 11 qubits".to_string(),
            ));
        }
        let dim = 1usize << self.n;
        let mut u = Array2::from_elem((dim, dim), C_ZERO);
        for k in 0..dim {
            let mut s = StateVector::basis(dim, k)?;
            self.apply_to(&mut s)?;
            for (r, a) in s.amplitudes().iter().enumerate() {
                u[(r, k)] = *a;
            }
        }
        Ok(u)
    }
}

/// The textbook power-of-two QFT: per qubit a Hadamard followed by
/// controlled phases R_k from each lower qubit, then qubit reversal.
/// Size is exactly n(n+1)/2 + ⌊n/2⌋.
pub fn exact_qft_circuit(n: usize) -> Result<QftCircuit> {
    qft_circuit_with_cutoff(n, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxQftParams {
    pub n: usize,
    /// Phase cutoff: controlled rotations R_k with k > m are dropped.
    pub m: usize,
}

impl ApproxQftParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(Error::domain(format!(
                "approximate transform needs 1 ≤ m ≤ n, got n={n}, m={m}"
            )));
        }
        Ok(ApproxQftParams { n, m })
    }

    /// Operator-norm error bound 2πn·2^{-m} of the truncation.
    pub fn predicted_error(&self) -> f64 {
        2.0 * PI * self.n as f64 / (1u64 << self.m) as f64
    }
}

/// Truncated QFT: drops every R_k with k > m, keeping ≤ nm + n gates.
/// m = n reproduces the exact circuit.
pub fn afft_circuit(params: &ApproxQftParams) -> Result<QftCircuit> {
    qft_circuit_with_cutoff(params.n, params.m)
}

fn qft_circuit_with_cutoff(n: usize, m: usize) -> Result<QftCircuit> {
    if n == 0 {
        return Err(Error::domain("circuit needs at least one qubit"));
    }
    if n > MAX_CIRCUIT_QUBITS {
        return Err(Error::capability(format!(
            "QFT circuits capped at {MAX_CIRCUIT_QUBITS} qubits"
        )));
    }
    let mut ops = Vec::new();
    for a in 0..n {
        ops.push(GateSpec::new(GateKind::H, vec![a]));
        for k in 2..=(n - a).min(m) {
            // Phase ω_{2^k} between qubit a and the qubit k-1 below it.
            ops.push(GateSpec::new(GateKind::Rk(k as u32), vec![a + k - 1, a]));
        }
    }
    for q in 0..n / 2 {
        ops.push(GateSpec::new(GateKind::Swap, vec![q, n - 1 - q]));
    }
    Ok(QftCircuit { n, ops })
}

/// F_{AB} for coprime A, B assembled from F_A ⊗ F_B and the CRT index
/// permutations: Π|j⟩ = |j mod A⟩|j mod B⟩, followed on each factor by
/// the multiplication maps |x⟩ → |xB mod A⟩ and |y⟩ → |yA mod B⟩, then
/// Π⁻¹ back to the plain index.
pub fn coprime_qft(a: usize, b: usize) -> Result<CyclicQftMatrix> {
    if a == 0 || b == 0 {
        return Err(Error::domain("moduli must be positive"));
    }
    if a.gcd(&b) != 1 {
        return Err(Error::domain(format!("moduli {a} and {b} share a factor")));
    }
    let n = a * b;
    if n > DENSE_DIM_CAP {
        return Err(Error::capability(format!(
            "composed transform capped at modulus {DENSE_DIM_CAP}, got {n}"
        )));
    }
    let fa = dense_qft(a)?;
    let fb = dense_qft(b)?;

    // K = F_A ⊗ F_B on pair indices x·B + y.
    let mut kron = Array2::from_elem((n, n), C_ZERO);
    for xr in 0..a {
        for yr in 0..b {
            for xc in 0..a {
                for yc in 0..b {
                    kron[(xr * b + yr, xc * b + yc)] =
                        fa.matrix()[(xr, xc)] * fb.matrix()[(yr, yc)];
                }
            }
        }
    }

    // Π and the tensor of the two multiplication permutations.
    let pi: Vec<usize> = (0..n).map(|j| (j % a) * b + (j % b)).collect();
    let mult = |x: usize, y: usize| ((x * b) % a) * b + ((y * a) % b);
    let mut mult_inv = vec![0usize; n];
    for x in 0..a {
        for y in 0..b {
            mult_inv[mult(x, y)] = x * b + y;
        }
    }

    // F[r, j] = (Π⁻¹ · Q · K · Π)[r, j] = K[Q⁻¹Π r, Π j].
    let mut matrix = Array2::from_elem((n, n), C_ZERO);
    for r in 0..n {
        let row = mult_inv[pi[r]];
        for j in 0..n {
            matrix[(r, j)] = kron[(row, pi[j])];
        }
    }
    Ok(CyclicQftMatrix::from_matrix(n, matrix))
}
