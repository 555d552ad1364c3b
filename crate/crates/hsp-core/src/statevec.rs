//! Dense complex state vectors and the small-gate machinery on top of
//! them.
//!
//! States live in C^dim with the normalization Σ|a_j|² = 1. When dim is
//! a power of two the state is "qubit-addressed": basis index bits name
//! qubits, and **qubit 0 is the most significant bit** of the index, so
//! |q₀q₁…⟩ reads left to right. Gates on k targets act as G(U ⊗ I)G⁻¹
//! where G is the basis permutation that moves the target bits to the
//! front; the implementations below specialize that expansion instead
//! of materializing it.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::Range;

use crate::{rng, tol, Error, Result};

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit position of qubit `q` in an `n`-qubit basis index (qubit 0 is
/// the most significant bit).
#[inline]
pub(crate) fn bit_pos(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// Inserts a bit with value 1 at position `p`, shifting higher bits up.
#[inline]
pub(crate) fn insert_set_bit(x: usize, p: usize) -> usize {
    ((x >> p) << (p + 1)) | (1 << p) | (x & ((1 << p) - 1))
}

/// e^{2πi·num/den} without accumulating phase drift.
#[inline]
pub fn root_of_unity(num: i64, den: u64) -> Complex64 {
    let angle = 2.0 * PI * (num.rem_euclid(den as i64) as f64) / den as f64;
    Complex64::from_polar(1.0, angle)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |index⟩ in C^dim.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("state dimension must be positive"));
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amps = vec![C_ZERO; dim];
        amps[index] = C_ONE;
        Ok(StateVector { dim, amps })
    }

    /// Wraps an amplitude vector, requiring unit norm within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::domain("state dimension must be positive"));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let dev = (norm2.sqrt() - 1.0).abs();
        if dev > tol::NORM {
            return Err(Error::NotNormalized(dev));
        }
        Ok(StateVector { dim: amps.len(), amps })
    }

    /// Uniform superposition over `support` (distinct indices).
    pub fn uniform_over(dim: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::domain("uniform superposition needs nonempty support"));
        }
        let mut amps = vec![C_ZERO; dim];
        let w = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        for &j in support {
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, dim });
            }
            if amps[j] != C_ZERO {
                return Err(Error::domain("uniform superposition support repeats an index"));
            }
            amps[j] = w;
        }
        Ok(StateVector { dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Smallest n with 2^n ≥ dim.
    pub fn qubit_count(&self) -> usize {
        self.dim.next_power_of_two().trailing_zeros() as usize
    }

    /// Basis indices are qubit strings only when dim is a power of two.
    pub fn is_qubit_addressed(&self) -> bool {
        self.dim.is_power_of_two()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩ with the conjugate on `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies `gate` in place. Trusts the gate's unitarity; use
    /// [`apply_gate`] for the checked, functional form.
    pub fn apply(&mut self, gate: &GateSpec) -> Result<()> {
        gate.validate(self.dim)?;
        let n = self.qubit_count();
        match &gate.kind {
            GateKind::H => {
                let p = bit_pos(n, gate.targets[0]);
                let mask = 1usize << p;
                let step = mask << 1;
                let mut base = 0;
                while base < self.dim {
                    for i in base..base + mask {
                        let j = i | mask;
                        let a = self.amps[i];
                        let b = self.amps[j];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[j] = (a - b) * FRAC_1_SQRT_2;
                    }
                    base += step;
                }
            }
            GateKind::P => {
                // diag(e^{iθ/2}, e^{-iθ/2}) with cos θ = 3/5: the
                // half-angle sits at (2 ± i)/√5.
                let s5 = 5f64.sqrt();
                let ph0 = Complex64::new(2.0 / s5, 1.0 / s5);
                let ph1 = ph0.conj();
                let mask = 1usize << bit_pos(n, gate.targets[0]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { ph0 } else { ph1 };
                }
            }
            GateKind::Rk(k) => {
                // Controlled phase ω_{2^k} on the |11⟩ component.
                let w = root_of_unity(1, 1u64 << k);
                let p_hi = bit_pos(n, gate.targets[0]);
                let p_lo = bit_pos(n, gate.targets[1]);
                let (p1, p2) = if p_hi > p_lo { (p_hi, p_lo) } else { (p_lo, p_hi) };
                for r in 0..self.dim >> 2 {
                    let idx = insert_set_bit(insert_set_bit(r, p2), p1);
                    self.amps[idx] *= w;
                }
            }
            GateKind::CNot => {
                let mc = 1usize << bit_pos(n, gate.targets[0]);
                let mt = 1usize << bit_pos(n, gate.targets[1]);
                for i in 0..self.dim {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            GateKind::CCNot => {
                let mc1 = 1usize << bit_pos(n, gate.targets[0]);
                let mc2 = 1usize << bit_pos(n, gate.targets[1]);
                let mt = 1usize << bit_pos(n, gate.targets[2]);
                for i in 0..self.dim {
                    if i & mc1 != 0 && i & mc2 != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            GateKind::Swap => {
                let ma = 1usize << bit_pos(n, gate.targets[0]);
                let mb = 1usize << bit_pos(n, gate.targets[1]);
                for i in 0..self.dim {
                    if i & ma != 0 && i & mb == 0 {
                        self.amps.swap(i, (i & !ma) | mb);
                    }
                }
            }
            GateKind::PermutationOfBasis(perm) => {
                let mut out = vec![C_ZERO; self.dim];
                for (k, &pk) in perm.iter().enumerate() {
                    out[pk] = self.amps[k];
                }
                self.amps = out;
            }
            GateKind::DenseUnitary(u) => {
                if gate.targets.is_empty() {
                    // Whole-space operator; the only gate form defined
                    // for non-power-of-two dimensions.
                    let mut out = vec![C_ZERO; self.dim];
                    for (r, o) in out.iter_mut().enumerate() {
                        let mut acc = C_ZERO;
                        for c in 0..self.dim {
                            acc += u[(r, c)] * self.amps[c];
                        }
                        *o = acc;
                    }
                    self.amps = out;
                } else {
                    self.apply_dense_on_targets(u, &gate.targets, n);
                }
            }
        }
        Ok(())
    }

    /// G(U ⊗ I)G⁻¹ for a 2^t-dimensional U on an ordered target list;
    /// targets[0] is the most significant bit of U's own index.
    fn apply_dense_on_targets(
        &mut self,
        u: &ndarray::Array2<Complex64>,
        targets: &[usize],
        n: usize,
    ) {
        let t = targets.len();
        let m = 1usize << t;
        let masks: Vec<usize> = targets.iter().map(|&q| 1usize << bit_pos(n, q)).collect();
        let all_mask: usize = masks.iter().sum();
        let mut gathered = vec![C_ZERO; m];
        let mut scattered = vec![C_ZERO; m];
        // Offsets of the m target-bit patterns over the full index.
        let offsets: Vec<usize> = (0..m)
            .map(|j| {
                (0..t)
                    .filter(|&b| j & (1 << (t - 1 - b)) != 0)
                    .map(|b| masks[b])
                    .sum()
            })
            .collect();
        for base in 0..self.dim {
            if base & all_mask != 0 {
                continue;
            }
            for j in 0..m {
                gathered[j] = self.amps[base | offsets[j]];
            }
            for (r, s) in scattered.iter_mut().enumerate() {
                let mut acc = C_ZERO;
                for (c, g) in gathered.iter().enumerate() {
                    acc += u[(r, c)] * g;
                }
                *s = acc;
            }
            for j in 0..m {
                self.amps[base | offsets[j]] = scattered[j];
            }
        }
    }

    /// `{"dim": …, "amps": [[re, im], …]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "amps": self.amps.iter().map(|a| vec![a.re, a.im]).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Hadamard on one qubit.
    H,
    /// Controlled NOT: targets = [control, target].
    CNot,
    /// Toffoli: targets = [control, control, target].
    CCNot,
    /// The fixed phase gate diag(e^{iθ/2}, e^{-iθ/2}) with cos θ = 3/5,
    /// sin θ = 4/5 (an irrational fraction of a turn, hence universal
    /// together with H, CNOT, CCNOT).
    P,
    /// Controlled phase diag(1,1,1,ω_{2^k}); targets = [control, target]
    /// though the action is symmetric.
    Rk(u32),
    /// Exchange two qubits.
    Swap,
    /// Relabels the whole basis: amplitude at k moves to perm[k]. The
    /// vector's length must equal the state dimension (any dimension,
    /// not only powers of two); targets stay empty.
    PermutationOfBasis(Vec<usize>),
    /// Explicit unitary. With targets it is 2^t-dimensional on those
    /// qubits; with no targets it acts on the whole space.
    DenseUnitary(ndarray::Array2<Complex64>),
}

impl GateKind {
    fn target_arity(&self) -> Option<usize> {
        match self {
            GateKind::H | GateKind::P => Some(1),
            GateKind::CNot | GateKind::Rk(_) | GateKind::Swap => Some(2),
            GateKind::CCNot => Some(3),
            GateKind::PermutationOfBasis(_) => Some(0),
            GateKind::DenseUnitary(_) => None,
        }
    }

    /// The operator as an explicit matrix (2^t × 2^t for qubit gates,
    /// dim × dim for basis permutations).
    pub fn matrix(&self) -> ndarray::Array2<Complex64> {
        use ndarray::Array2;
        let from_rows = |d: usize, entries: &[(usize, usize, Complex64)]| {
            let mut m = Array2::from_elem((d, d), C_ZERO);
            for &(r, c, v) in entries {
                m[(r, c)] = v;
            }
            m
        };
        match self {
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                from_rows(2, &[(0, 0, h), (0, 1, h), (1, 0, h), (1, 1, -h)])
            }
            GateKind::CNot => from_rows(
                4,
                &[(0, 0, C_ONE), (1, 1, C_ONE), (2, 3, C_ONE), (3, 2, C_ONE)],
            ),
            GateKind::CCNot => {
                let mut m = Array2::eye(8);
                m[(6, 6)] = C_ZERO;
                m[(7, 7)] = C_ZERO;
                m[(6, 7)] = C_ONE;
                m[(7, 6)] = C_ONE;
                m
            }
            GateKind::P => {
                let s5 = 5f64.sqrt();
                let ph = Complex64::new(2.0 / s5, 1.0 / s5);
                from_rows(2, &[(0, 0, ph), (1, 1, ph.conj())])
            }
            GateKind::Rk(k) => {
                let mut m = Array2::eye(4);
                m[(3, 3)] = root_of_unity(1, 1u64 << k);
                m
            }
            GateKind::Swap => from_rows(
                4,
                &[(0, 0, C_ONE), (1, 2, C_ONE), (2, 1, C_ONE), (3, 3, C_ONE)],
            ),
            GateKind::PermutationOfBasis(perm) => {
                let mut m = Array2::from_elem((perm.len(), perm.len()), C_ZERO);
                for (k, &pk) in perm.iter().enumerate() {
                    m[(pk, k)] = C_ONE;
                }
                m
            }
            GateKind::DenseUnitary(u) => u.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    /// Qubit indices, most significant first for multi-qubit kinds.
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        GateSpec { kind, targets }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if let Some(arity) = self.kind.target_arity() {
            if self.targets.len() != arity {
                return Err(Error::BadTargets(format!(
                    "gate wants {} targets, got {}",
                    arity,
                    self.targets.len()
                )));
            }
        }
        for (i, &a) in self.targets.iter().enumerate() {
            for &b in &self.targets[i + 1..] {
                if a == b {
                    return Err(Error::BadTargets(format!("target {a} repeats")));
                }
            }
        }
        match &self.kind {
            GateKind::PermutationOfBasis(perm) => {
                if perm.len() != dim {
                    return Err(Error::DimMismatch(perm.len(), dim));
                }
                let mut seen = vec![false; dim];
                for &p in perm {
                    if p >= dim || seen[p] {
                        return Err(Error::domain("basis permutation is not a bijection"));
                    }
                    seen[p] = true;
                }
                Ok(())
            }
            GateKind::DenseUnitary(u) => {
                if u.nrows() != u.ncols() {
                    return Err(Error::NotUnitary("matrix is not square".into()));
                }
                if self.targets.is_empty() {
                    if u.nrows() != dim {
                        return Err(Error::DimMismatch(u.nrows(), dim));
                    }
                } else {
                    if !dim.is_power_of_two() {
                        return Err(Error::NotQubitAddressed(dim));
                    }
                    let t = self.targets.len();
                    if t > 12 {
                        return Err(Error::capability(
                            "dense unitaries limited to 12 targets".to_string(),
                        ));
                    }
                    if u.nrows() != 1usize << t {
                        return Err(Error::DimMismatch(u.nrows(), 1usize << t));
                    }
                    let n = dim.trailing_zeros() as usize;
                    if let Some(&q) = self.targets.iter().find(|&&q| q >= n) {
                        return Err(Error::BadTargets(format!(
                            "qubit {q} outside a {n}-qubit state"
                        )));
                    }
                }
                // Entrywise unitarity check, skipped above desk scale
                // where the O(dim³) product would dominate the run.
                if u.nrows() <= 1024 {
                    let residual = max_abs_uut_minus_identity(u);
                    if residual > tol::UNITARY * u.nrows() as f64 {
                        return Err(Error::NotUnitary(format!(
                            "‖UU† − I‖_max = {residual:.3e}"
                        )));
                    }
                }
                Ok(())
            }
            _ => {
                if !dim.is_power_of_two() {
                    return Err(Error::NotQubitAddressed(dim));
                }
                let n = dim.trailing_zeros() as usize;
                if let Some(&q) = self.targets.iter().find(|&&q| q >= n) {
                    return Err(Error::BadTargets(format!(
                        "qubit {q} outside a {n}-qubit state"
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn max_abs_uut_minus_identity(u: &ndarray::Array2<Complex64>) -> f64 {
    let d = u.nrows();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let mut acc = C_ZERO;
            for k in 0..d {
                acc += u[(r, k)] * u[(c, k)].conj();
            }
            let expect = if r == c { C_ONE } else { C_ZERO };
            worst = worst.max((acc - expect).norm());
        }
    }
    worst
}

/// Named, ordered qubit ranges partitioning a state.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterLayout {
    registers: Vec<(String, Range<usize>)>,
}

impl RegisterLayout {
    /// Ranges must be contiguous from qubit 0 and non-overlapping.
    pub fn new(registers: Vec<(&str, Range<usize>)>) -> Result<Self> {
        let mut expect = 0usize;
        for (name, r) in &registers {
            if r.start != expect || r.end <= r.start {
                return Err(Error::domain(format!(
                    "register {name} does not tile the qubit line"
                )));
            }
            expect = r.end;
        }
        let mut names: Vec<&str> = registers.iter().map(|(n, _)| *n).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != registers.len() {
            return Err(Error::domain("register names repeat"));
        }
        Ok(RegisterLayout {
            registers: registers
                .into_iter()
                .map(|(n, r)| (n.to_string(), r))
                .collect(),
        })
    }

    /// One register spanning all n qubits.
    pub fn single(name: &str, n: usize) -> Self {
        RegisterLayout {
            registers: vec![(name.to_string(), 0..n)],
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.last().map_or(0, |(_, r)| r.end)
    }

    pub fn range_of(&self, name: &str) -> Option<Range<usize>> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.clone())
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, Range<usize>)> {
        self.registers.iter().map(|(n, r)| (n.as_str(), r.clone()))
    }

    fn check_covers(&self, state: &StateVector) -> Result<()> {
        if !state.is_qubit_addressed() {
            return Err(Error::NotQubitAddressed(state.dim()));
        }
        if self.total_qubits() != state.qubit_count() {
            return Err(Error::DimMismatch(self.total_qubits(), state.qubit_count()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

/// |index⟩ in C^dim.
pub fn basis_state(dim: usize, index: usize) -> Result<StateVector> {
    StateVector::basis(dim, index)
}

/// Kronecker product; the joint index is p·b.dim + q.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    if a.dim == 1 {
        return b.clone();
    }
    if b.dim == 1 {
        return a.clone();
    }
    let mut amps = Vec::with_capacity(a.dim * b.dim);
    for pa in &a.amps {
        for qb in &b.amps {
            amps.push(pa * qb);
        }
    }
    StateVector {
        dim: a.dim * b.dim,
        amps,
    }
}

/// Checked functional gate application: validates the layout, applies,
/// and confirms the norm survived.
pub fn apply_gate(
    state: &StateVector,
    gate: &GateSpec,
    layout: &RegisterLayout,
) -> Result<StateVector> {
    layout.check_covers(state)?;
    let mut out = state.clone();
    out.apply(gate)?;
    let dev = (out.norm() - 1.0).abs();
    if dev > tol::NORM {
        return Err(Error::NotNormalized(dev));
    }
    Ok(out)
}

/// Measures one register in the computational basis, collapsing the
/// rest of the state conditioned on the outcome.
pub fn measure(
    state: &StateVector,
    layout: &RegisterLayout,
    register: &str,
    rng_seed: u64,
) -> Result<MeasurementRecord> {
    measure_with(state, layout, register, &mut rng::master_rng(rng_seed))
}

/// As [`measure`] but drawing from a caller-owned generator, so
/// repeated shots can share one stream.
pub fn measure_with(
    state: &StateVector,
    layout: &RegisterLayout,
    register: &str,
    rng: &mut impl Rng,
) -> Result<MeasurementRecord> {
    layout.check_covers(state)?;
    let range = layout
        .range_of(register)
        .ok_or_else(|| Error::domain(format!("no register named {register}")))?;
    let n = state.qubit_count();
    let len = range.end - range.start;
    let shift = n - range.end;
    let vmask = (1usize << len) - 1;

    let mut probs = vec![0.0f64; 1 << len];
    for (i, a) in state.amps.iter().enumerate() {
        probs[(i >> shift) & vmask] += a.norm_sqr();
    }
    let outcome = rng::draw_index(&probs, rng);
    let probability = probs[outcome];

    let scale = Complex64::new(1.0 / probability.sqrt(), 0.0);
    let amps: Vec<Complex64> = state
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if (i >> shift) & vmask == outcome {
                a * scale
            } else {
                C_ZERO
            }
        })
        .collect();
    Ok(MeasurementRecord {
        outcome,
        probability,
        post_state: StateVector {
            dim: state.dim,
            amps,
        },
    })
}

/// Full-basis measurement; works for any dimension.
pub fn measure_full(state: &StateVector, rng: &mut impl Rng) -> MeasurementRecord {
    let probs: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
    let outcome = rng::draw_index(&probs, rng);
    MeasurementRecord {
        outcome,
        probability: probs[outcome],
        post_state: StateVector::basis(state.dim, outcome).expect("outcome in range"),
    }
}

/// Euclidean norm of the amplitude difference.
pub fn state_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(a.dim, b.dim));
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Σ_k | |a_k|² − |b_k|² | between the induced outcome distributions.
/// Bounded by 2ε + ε² when the states are within Euclidean distance ε.
pub fn total_variation(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(a.dim, b.dim));
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
        .sum())
}
