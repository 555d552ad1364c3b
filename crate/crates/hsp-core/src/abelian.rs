//! Finite abelian groups presented as modulus tuples Z_{N₁} ⊕ … ⊕ Z_{N_k},
//! their characters χ_g(h) = ∏_j ω_{N_j}^{g_j h_j}, the operators F_G,
//! τ_t, φ_h, and the hidden-subgroup machinery: quantum sampling from
//! H⊥ followed by classical reconstruction of H through a Smith normal
//! form of the character constraints.
//!
//! Elements are flattened row-major (first coordinate most significant),
//! matching the tensor-product index convention, so F_G = ⊗_j F_{N_j}
//! holds entrywise.

use ndarray::Array2;
use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;

use crate::qft::dense_qft;
use crate::statevec::{root_of_unity, StateVector, C_ZERO};
use crate::{rng, Error, Result};

/// Dense |G|×|G| operators are materialized only up to this order.
pub const DENSE_GROUP_CAP: u64 = 4096;
/// Oracle tables and vector-level transforms are capped here.
pub const TABLE_ORDER_CAP: u64 = 1 << 16;
/// The sampler's exact distribution costs O(|G|²) to build.
pub const SAMPLER_ORDER_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroup {
    moduli: Vec<u64>,
    order: u64,
    lcm_d: u64,
    alphas: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl AbelianGroup {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() || moduli.iter().any(|&n| n == 0) {
            return Err(Error::domain("moduli must be a nonempty list of positive integers"));
        }
        let mut order: u64 = 1;
        let mut lcm_d: u64 = 1;
        for &n in &moduli {
            order = order
                .checked_mul(n)
                .ok_or_else(|| Error::capability("group order overflows u64".to_string()))?;
            lcm_d = lcm_d.lcm(&n);
        }
        let alphas = moduli.iter().map(|&n| lcm_d / n).collect();
        Ok(AbelianGroup {
            moduli,
            order,
            lcm_d,
            alphas,
        })
    }

    /// Parses descriptors like "Z4xZ2xZ5".
    pub fn parse(descriptor: &str) -> Result<Self> {
        let mut moduli = Vec::new();
        for part in descriptor.split(['x', 'X']) {
            let digits = part
                .strip_prefix(['Z', 'z'])
                .ok_or_else(|| Error::domain(format!("bad group factor {part:?}")))?;
            let n: u64 = digits
                .parse()
                .map_err(|_| Error::domain(format!("bad group factor {part:?}")))?;
            moduli.push(n);
        }
        AbelianGroup::new(moduli)
    }

    pub fn descriptor(&self) -> String {
        self.moduli
            .iter()
            .map(|n| format!("Z{n}"))
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// d = lcm(N₁,…,N_k): the exponent of the group.
    pub fn lcm_exponent(&self) -> u64 {
        self.lcm_d
    }

    /// α_l = d / N_l.
    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    pub fn element(&self, coords: Vec<u64>) -> Result<GroupElement> {
        if coords.len() != self.moduli.len() {
            return Err(Error::domain(format!(
                "element has {} coordinates, group has rank {}",
                coords.len(),
                self.moduli.len()
            )));
        }
        for (c, n) in coords.iter().zip(&self.moduli) {
            if c >= n {
                return Err(Error::domain(format!("coordinate {c} outside Z_{n}")));
            }
        }
        Ok(GroupElement { coords })
    }

    /// Row-major flat index (first coordinate most significant).
    pub fn index_of(&self, g: &GroupElement) -> usize {
        let mut idx: u64 = 0;
        for (c, n) in g.coords.iter().zip(&self.moduli) {
            idx = idx * n + c;
        }
        idx as usize
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0u64; self.moduli.len()];
        for l in (0..self.moduli.len()).rev() {
            coords[l] = index as u64 % self.moduli[l];
            index /= self.moduli[l] as usize;
        }
        GroupElement { coords }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .zip(&self.moduli)
                .map(|((x, y), n)| (x + y) % n)
                .collect(),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&self.moduli)
                .map(|(x, n)| (n - x) % n)
                .collect(),
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order as usize).map(|i| self.element_at(i))
    }
}

/// Exponent e with χ_g(h) = ω_d^e: e = Σ_l α_l g_l h_l mod d. Exact
/// integer arithmetic, so χ_g(h) = 1 is decidable as e = 0.
pub fn character_exponent(group: &AbelianGroup, g: &GroupElement, h: &GroupElement) -> u64 {
    let d = group.lcm_d as u128;
    let mut e: u128 = 0;
    for ((a, x), y) in group.alphas.iter().zip(&g.coords).zip(&h.coords) {
        e = (e + (*a as u128) * (*x as u128) % d * (*y as u128)) % d;
    }
    e as u64
}

/// χ_g(h) = ∏_j ω_{N_j}^{g_j h_j}.
pub fn character_eval(group: &AbelianGroup, g: &GroupElement, h: &GroupElement) -> Complex64 {
    root_of_unity(character_exponent(group, g, h) as i64, group.lcm_d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    generators: Vec<GroupElement>,
    /// Sorted by flat index.
    elements: Vec<GroupElement>,
    indices: Vec<usize>,
}

impl Subgroup {
    pub fn trivial(group: &AbelianGroup) -> Self {
        Subgroup {
            generators: Vec::new(),
            elements: vec![group.identity()],
            indices: vec![0],
        }
    }

    /// Closes the generators under addition (which suffices in a finite
    /// group: −g is a repeated sum of g).
    pub fn from_generators(group: &AbelianGroup, generators: &[GroupElement]) -> Result<Self> {
        for g in generators {
            group.element(g.coords.clone())?;
        }
        let mut seen = vec![false; group.order() as usize];
        seen[0] = true;
        let mut queue = vec![group.identity()];
        let mut head = 0;
        while head < queue.len() {
            let cur = queue[head].clone();
            head += 1;
            for g in generators {
                let next = group.add(&cur, g);
                let idx = group.index_of(&next);
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push(next);
                }
            }
        }
        let indices: Vec<usize> = seen
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .collect();
        let elements = indices.iter().map(|&i| group.element_at(i)).collect();
        Ok(Subgroup {
            generators: generators.to_vec(),
            elements,
            indices,
        })
    }

    pub(crate) fn from_sorted_indices(group: &AbelianGroup, indices: Vec<usize>) -> Self {
        let elements: Vec<GroupElement> = indices.iter().map(|&i| group.element_at(i)).collect();
        Subgroup {
            generators: elements.clone(),
            elements,
            indices,
        }
    }

    /// Parses generator lists like "[(2,0,0),(0,1,0)]".
    pub fn parse(group: &AbelianGroup, text: &str) -> Result<Self> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::domain(format!("bad subgroup syntax {text:?}")))?;
        let mut generators = Vec::new();
        let compact: String = inner.chars().filter(|c| !c.is_whitespace()).collect();
        if !compact.is_empty() {
            for tuple in compact.split("),(") {
                let tuple = tuple.trim_start_matches('(').trim_end_matches(')');
                let coords: Vec<u64> = tuple
                    .split(',')
                    .map(|c| {
                        c.parse()
                            .map_err(|_| Error::domain(format!("bad coordinate {c:?}")))
                    })
                    .collect::<Result<_>>()?;
                generators.push(group.element(coords)?);
            }
        }
        Subgroup::from_generators(group, &generators)
    }

    pub fn format_generators(&self) -> String {
        let gens = if self.generators.is_empty() {
            &self.elements[..1]
        } else {
            &self.generators[..]
        };
        let tuples: Vec<String> = gens
            .iter()
            .map(|g| {
                let cs: Vec<String> = g.coords.iter().map(u64::to_string).collect();
                format!("({})", cs.join(","))
            })
            .collect();
        format!("[{}]", tuples.join(","))
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn contains(&self, group: &AbelianGroup, g: &GroupElement) -> bool {
        self.contains_index(group.index_of(g))
    }

    /// Set equality (independent of how either side was generated).
    pub fn set_eq(&self, other: &Subgroup) -> bool {
        self.indices == other.indices
    }
}

/// H⊥ = {g : χ_g(h) = 1 for all h ∈ H}, by brute force over G.
pub fn orthogonal_subgroup(group: &AbelianGroup, h: &Subgroup) -> Result<Subgroup> {
    if group.order() > TABLE_ORDER_CAP {
        return Err(Error::capability(format!(
            "orthogonal subgroup enumeration capped at order {TABLE_ORDER_CAP}"
        )));
    }
    let mut indices = Vec::new();
    for (gi, g) in group.elements().enumerate() {
        if h.elements()
            .iter()
            .all(|hh| character_exponent(group, &g, hh) == 0)
        {
            indices.push(gi);
        }
    }
    Ok(Subgroup::from_sorted_indices(group, indices))
}

/// Dense F_G with entries χ_g(h)/√|G|.
pub fn group_qft(group: &AbelianGroup) -> Result<Array2<Complex64>> {
    let n = group.order();
    if n > DENSE_GROUP_CAP {
        return Err(Error::capability(format!(
            "dense F_G capped at order {DENSE_GROUP_CAP}, got {n} (use apply_group_qft)"
        )));
    }
    let n = n as usize;
    let scale = 1.0 / (n as f64).sqrt();
    let els: Vec<GroupElement> = group.elements().collect();
    let mut m = Array2::from_elem((n, n), C_ZERO);
    for (r, g) in els.iter().enumerate() {
        for (c, h) in els.iter().enumerate() {
            m[(r, c)] = character_eval(group, g, h) * scale;
        }
    }
    Ok(m)
}

/// F_G applied axis by axis (one cyclic transform per factor), without
/// materializing the |G|×|G| matrix.
pub fn apply_group_qft(group: &AbelianGroup, state: &StateVector) -> Result<StateVector> {
    let n = group.order();
    if state.dim() as u64 != n {
        return Err(Error::DimMismatch(state.dim(), n as usize));
    }
    if n > TABLE_ORDER_CAP {
        return Err(Error::capability(format!(
            "vector-level F_G capped at order {TABLE_ORDER_CAP}"
        )));
    }
    let mut amps = state.amplitudes().to_vec();
    let mut stride = n as usize;
    for &nj in group.moduli() {
        let nj = nj as usize;
        stride /= nj;
        let f = dense_qft(nj)?;
        let block = nj * stride;
        let mut scratch = vec![C_ZERO; nj];
        for base in (0..amps.len()).step_by(block) {
            for off in 0..stride {
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = amps[base + off + j * stride];
                }
                let out = f.apply_to_vec(&scratch);
                for (j, o) in out.into_iter().enumerate() {
                    amps[base + off + j * stride] = o;
                }
            }
        }
    }
    StateVector::from_amplitudes(amps)
}

/// τ_t: the permutation |g⟩ → |t + g⟩.
pub fn translation_op(group: &AbelianGroup, t: &GroupElement) -> Result<Array2<Complex64>> {
    let n = group.order();
    if n > DENSE_GROUP_CAP {
        return Err(Error::capability(format!(
            "dense τ_t capped at order {DENSE_GROUP_CAP}"
        )));
    }
    let n = n as usize;
    let one = Complex64::new(1.0, 0.0);
    let mut m = Array2::from_elem((n, n), C_ZERO);
    for i in 0..n {
        let g = group.element_at(i);
        m[(group.index_of(&group.add(t, &g)), i)] = one;
    }
    Ok(m)
}

/// φ_h: the diagonal operator χ_g(h) on |g⟩.
pub fn phase_op(group: &AbelianGroup, h: &GroupElement) -> Result<Array2<Complex64>> {
    let n = group.order();
    if n > DENSE_GROUP_CAP {
        return Err(Error::capability(format!(
            "dense φ_h capped at order {DENSE_GROUP_CAP}"
        )));
    }
    let n = n as usize;
    let mut m = Array2::from_elem((n, n), C_ZERO);
    for i in 0..n {
        m[(i, i)] = character_eval(group, &group.element_at(i), h);
    }
    Ok(m)
}

/// Coset-separating oracle: f(g₁) = f(g₂) ⟺ g₁ − g₂ ∈ H. Labels are
/// the flat index of the least element of the coset.
#[derive(Debug, Clone)]
pub struct CosetOracle {
    labels: Vec<u32>,
    hidden: Subgroup,
    distinct: usize,
}

impl CosetOracle {
    pub fn new(group: &AbelianGroup, hidden: Subgroup) -> Result<Self> {
        let n = group.order();
        if n > TABLE_ORDER_CAP {
            return Err(Error::capability(format!(
                "oracle tables capped at order {TABLE_ORDER_CAP}"
            )));
        }
        let n = n as usize;
        let mut labels = vec![u32::MAX; n];
        let mut distinct = 0;
        for start in 0..n {
            if labels[start] != u32::MAX {
                continue;
            }
            // `start` is the least element of a fresh coset.
            let rep = group.element_at(start);
            for h in hidden.elements() {
                labels[group.index_of(&group.add(&rep, h))] = start as u32;
            }
            distinct += 1;
        }
        debug_assert_eq!(distinct as u64 * hidden.order(), group.order());
        Ok(CosetOracle {
            labels,
            hidden,
            distinct,
        })
    }

    /// Wraps a precomputed label table (any injective-on-cosets
    /// labelling), verifying the separation property against `hidden`.
    pub fn from_labels(group: &AbelianGroup, labels: Vec<u32>, hidden: Subgroup) -> Result<Self> {
        if labels.len() as u64 != group.order() {
            return Err(Error::DimMismatch(labels.len(), group.order() as usize));
        }
        // Constant on cosets…
        for (i, &lab) in labels.iter().enumerate() {
            let g = group.element_at(i);
            for h in hidden.generators() {
                let j = group.index_of(&group.add(&g, h));
                if labels[j] != lab {
                    return Err(Error::domain(format!(
                        "labels are not constant on cosets of the claimed subgroup (indices {i}, {j})"
                    )));
                }
            }
        }
        // …and with exactly one label per coset.
        let mut sorted: Vec<u32> = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let distinct = sorted.len();
        if distinct as u64 * hidden.order() != group.order() {
            return Err(Error::domain(format!(
                "{distinct} labels cannot separate cosets of a subgroup of order {}",
                hidden.order()
            )));
        }
        Ok(CosetOracle {
            labels,
            hidden,
            distinct,
        })
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn label_count(&self) -> usize {
        self.distinct
    }

    /// The construction-time subgroup (for verification only; the
    /// quantum procedure never reads it).
    pub fn hidden(&self) -> &Subgroup {
        &self.hidden
    }
}

/// The exact outcome distribution of one quantum sampling round:
/// F_G|0⟩ on the first register, oracle into the second, F_G again,
/// then a computational-basis measurement of the first register.
///
/// Built once per oracle; repeated sampling is then a CDF draw, which
/// keeps large trial counts affordable.
#[derive(Debug, Clone)]
pub struct HspSampler {
    group: AbelianGroup,
    dist: Vec<f64>,
    support: Vec<usize>,
    support_probs: Vec<f64>,
}

impl HspSampler {
    pub fn new(group: &AbelianGroup, oracle: &CosetOracle) -> Result<Self> {
        let n = group.order();
        if n > SAMPLER_ORDER_CAP {
            return Err(Error::capability(format!(
                "exact sampling distribution capped at order {SAMPLER_ORDER_CAP}"
            )));
        }
        let n = n as usize;
        let d = group.lcm_exponent();
        // ω_d^e lookup, plain coordinates, and reduced rows α_l y_l mod d.
        let omega: Vec<Complex64> = (0..d).map(|e| root_of_unity(e as i64, d)).collect();
        let coords: Vec<Vec<u64>> = group.elements().map(|g| g.coords.clone()).collect();
        let reduced: Vec<Vec<u64>> = coords
            .iter()
            .map(|c| {
                group
                    .alphas()
                    .iter()
                    .zip(c)
                    .map(|(a, x)| a * x % d)
                    .collect()
            })
            .collect();

        // Group basis indices into oracle-label blocks.
        let mut blocks: std::collections::HashMap<u32, Vec<usize>> = std::collections::HashMap::new();
        for i in 0..n {
            blocks.entry(oracle.label(i)).or_default().push(i);
        }

        // After the second F_G the amplitude on (y, block x) is
        // (1/|G|) Σ_{g in block} χ_y(g); the first-register distribution
        // sums |·|² over blocks.
        let mut dist = vec![0.0f64; n];
        let scale = 1.0 / (n as f64);
        for (y, p) in dist.iter_mut().enumerate() {
            let ry = &reduced[y];
            let mut total = 0.0;
            for block in blocks.values() {
                let mut acc = C_ZERO;
                for &gi in block {
                    let mut e: u64 = 0;
                    for (r, c) in ry.iter().zip(&coords[gi]) {
                        e = (e + r * (c % d)) % d;
                    }
                    acc += omega[e as usize];
                }
                total += (acc * scale).norm_sqr();
            }
            *p = total;
        }
        let sum: f64 = dist.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-9);

        let mut support = Vec::new();
        let mut support_probs = Vec::new();
        for (y, &p) in dist.iter().enumerate() {
            if p > 1e-12 {
                support.push(y);
                support_probs.push(p);
            }
        }
        Ok(HspSampler {
            group: group.clone(),
            dist,
            support,
            support_probs,
        })
    }

    /// The full pre-measurement outcome distribution over G.
    pub fn exact_distribution(&self) -> &[f64] {
        &self.dist
    }

    /// Outcome indices carrying nonzero probability.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sample(&self, rng: &mut impl Rng) -> GroupElement {
        let j = rng::draw_index(&self.support_probs, rng);
        self.group.element_at(self.support[j])
    }
}

/// One quantum sample from H⊥.
pub fn hsp_sample(group: &AbelianGroup, oracle: &CosetOracle, seed: u64) -> Result<GroupElement> {
    let sampler = HspSampler::new(group, oracle)?;
    Ok(sampler.sample(&mut rng::master_rng(seed)))
}

// ---------------------------------------------------------------------
// Classical reconstruction.

pub type IntMatrix = Vec<Vec<i64>>;

/// Smith-style diagonalization D = U·A·V mod d: elementary row/column
/// operations over the integers with unimodular U, V accumulated, then
/// everything reduced mod d. No divisibility chain is enforced;
/// diagonality is all the solver needs.
pub fn smith_normal_form(a: &IntMatrix, d: u64) -> Result<(IntMatrix, IntMatrix, IntMatrix)> {
    if d == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    let rows = a.len();
    if rows == 0 {
        return Err(Error::domain("matrix needs at least one row"));
    }
    let cols = a[0].len();
    if cols == 0 || a.iter().any(|r| r.len() != cols) {
        return Err(Error::domain("matrix rows must be nonempty and equal length"));
    }

    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..rows).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();

    let limit = rows.min(cols);
    for pivot in 0..limit {
        loop {
            // Smallest nonzero entry in the working block → pivot seat.
            let mut best: Option<(usize, usize)> = None;
            for r in pivot..rows {
                for c in pivot..cols {
                    if m[r][c] != 0
                        && best.map_or(true, |(br, bc)| m[r][c].abs() < m[br][bc].abs())
                    {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else { break };
            m.swap(pivot, br);
            u.swap(pivot, br);
            if bc != pivot {
                for row in &mut m {
                    row.swap(pivot, bc);
                }
                for row in &mut v {
                    row.swap(pivot, bc);
                }
            }
            // Reduce the pivot row and column.
            let mut clean = true;
            let p = m[pivot][pivot];
            for r in pivot + 1..rows {
                let q = div_round(m[r][pivot], p);
                if q != 0 {
                    for c in 0..cols {
                        m[r][c] -= q * m[pivot][c];
                    }
                    for c in 0..rows {
                        u[r][c] -= q * u[pivot][c];
                    }
                }
                if m[r][pivot] != 0 {
                    clean = false;
                }
            }
            for c in pivot + 1..cols {
                let q = div_round(m[pivot][c], p);
                if q != 0 {
                    for r in 0..rows {
                        m[r][c] -= q * m[r][pivot];
                    }
                    for r in 0..cols {
                        v[r][c] -= q * v[r][pivot];
                    }
                }
                if m[pivot][c] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }

    let reduce = |mat: Vec<Vec<i128>>| -> IntMatrix {
        mat.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| x.rem_euclid(d as i128) as i64)
                    .collect()
            })
            .collect()
    };
    Ok((reduce(m), reduce(u), reduce(v)))
}

/// Round-toward-nearest quotient, which keeps remainders at most |p|/2
/// and the elimination numerically tame.
fn div_round(x: i128, p: i128) -> i128 {
    let q = x / p;
    let r = x - q * p;
    if 2 * r.abs() > p.abs() {
        q + if (r < 0) == (p < 0) { 1 } else { -1 }
    } else {
        q
    }
}

/// The character constraint system: row j says Σ_l α_l g^j_l X_l ≡ 0
/// (mod d) for sample g^j, i.e. χ_X(g^j) = 1.
#[derive(Debug, Clone)]
pub struct LinearSystemModD {
    group: AbelianGroup,
    a: IntMatrix,
    d: u64,
    dmat: IntMatrix,
    v: IntMatrix,
    /// Per-coordinate solution counts gcd(D_ii, d) for Y.
    y_counts: Vec<u64>,
}

impl LinearSystemModD {
    pub fn from_samples(group: &AbelianGroup, samples: &[GroupElement]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("need at least one sample row"));
        }
        let d = group.lcm_exponent();
        let a: IntMatrix = samples
            .iter()
            .map(|g| {
                group
                    .alphas()
                    .iter()
                    .zip(g.coords())
                    .map(|(al, x)| (al * x % d) as i64)
                    .collect()
            })
            .collect();
        let (dmat, _u, v) = smith_normal_form(&a, d)?;
        let k = group.rank();
        let y_counts = (0..k)
            .map(|i| {
                let dii = if i < dmat.len() { dmat[i][i] as u64 } else { 0 };
                dii.gcd(&d).max(1)
            })
            .collect();
        Ok(LinearSystemModD {
            group: group.clone(),
            a,
            d,
            dmat,
            v,
            y_counts,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.d
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn diagonal(&self) -> &IntMatrix {
        &self.dmat
    }

    /// Number of solutions of DY ≡ 0 in (Z_d)^k: ∏ gcd(D_ii, d)
    /// (coordinates past the diagonal are free).
    pub fn solution_count(&self) -> u128 {
        self.y_counts.iter().map(|&c| c as u128).product()
    }

    /// Number of distinct group elements among the solutions. The
    /// reduction X_l mod N_l is exactly ∏_l α_l to one on the solution
    /// set (adding N_l to X_l changes nothing mod d), so this divides
    /// evenly.
    pub fn group_solution_count(&self) -> u128 {
        let collapse: u128 = self.group.alphas().iter().map(|&a| a as u128).product();
        self.solution_count() / collapse
    }

    pub fn y_solution_counts(&self) -> &[u64] {
        &self.y_counts
    }

    /// Checks AX ≡ 0 (mod d) against the raw sample matrix.
    pub fn is_solution(&self, x: &GroupElement) -> bool {
        self.a.iter().all(|row| {
            let mut acc: u128 = 0;
            for (coef, c) in row.iter().zip(x.coords()) {
                acc = (acc + (*coef as u128) * (*c as u128)) % self.d as u128;
            }
            acc == 0
        })
    }

    /// Uniform draw from the solution set: per diagonal coordinate
    /// Y_i = (d/g)·j with j uniform in 0..g for g = gcd(D_ii, d), then
    /// X = VY mod d read as group coordinates (X_l mod N_l).
    pub fn sample_solution(&self, rng: &mut impl Rng) -> GroupElement {
        let k = self.group.rank();
        let y: Vec<u64> = self
            .y_counts
            .iter()
            .map(|&g| (self.d / g) * rng.gen_range(0..g))
            .collect();
        let mut coords = vec![0u64; k];
        for (l, slot) in coords.iter_mut().enumerate() {
            let mut acc: u128 = 0;
            for (i, &yi) in y.iter().enumerate() {
                acc = (acc + (self.v[l][i] as u128) * (yi as u128)) % self.d as u128;
            }
            *slot = acc as u64 % self.group.moduli()[l];
        }
        GroupElement { coords }
    }
}

/// One uniform solution of the system, as a group element.
pub fn uniform_solution_sample(sys: &LinearSystemModD, seed: u64) -> GroupElement {
    sys.sample_solution(&mut rng::master_rng(seed))
}

/// Full hidden-subgroup recovery: T = t1 + ⌈log|G|⌉ quantum samples
/// fix the constraint system, S = t2 + ⌈log|G|⌉ uniform solutions
/// generate the answer. Succeeds (returns exactly H) with probability
/// at least (1 − 2^{−t1})(1 − 2^{−t2}).
pub fn solve_hsp(
    group: &AbelianGroup,
    oracle: &CosetOracle,
    t1: u32,
    t2: u32,
    seed: u64,
) -> Result<Subgroup> {
    let sampler = HspSampler::new(group, oracle)?;
    solve_hsp_with_sampler(group, &sampler, t1, t2, &mut rng::master_rng(seed))
}

/// As [`solve_hsp`] with an amortized sampler and caller-owned RNG, for
/// repeated-trial studies.
pub fn solve_hsp_with_sampler(
    group: &AbelianGroup,
    sampler: &HspSampler,
    t1: u32,
    t2: u32,
    rng: &mut impl Rng,
) -> Result<Subgroup> {
    let order = group.order();
    let log_g: u64 = if order <= 1 {
        0
    } else {
        (64 - (order - 1).leading_zeros()) as u64
    };
    let t = t1 as u64 + log_g;
    let s = t2 as u64 + log_g;
    let samples: Vec<GroupElement> = (0..t).map(|_| sampler.sample(rng)).collect();
    let sys = LinearSystemModD::from_samples(group, &samples)?;
    let sols: Vec<GroupElement> = (0..s).map(|_| sys.sample_solution(rng)).collect();
    Subgroup::from_generators(group, &sols)
}

// ---------------------------------------------------------------------
// Corpus helpers.

/// Every subgroup of the group, by closure saturation. Exponential in
/// the lattice size; intended for |G| small enough to enumerate.
pub fn all_subgroups(group: &AbelianGroup) -> Result<Vec<Subgroup>> {
    if group.order() > 4096 {
        return Err(Error::capability(
            "subgroup lattice enumeration capped at order 4096".to_string(),
        ));
    }
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    let mut out: Vec<Subgroup> = Vec::new();
    let mut queue: Vec<Subgroup> = vec![Subgroup::trivial(group)];
    seen.insert(queue[0].indices.clone());
    while let Some(cur) = queue.pop() {
        for g in group.elements() {
            if cur.contains(group, &g) {
                continue;
            }
            let mut gens = cur.generators.clone();
            gens.push(g);
            let bigger = Subgroup::from_generators(group, &gens)?;
            if seen.insert(bigger.indices.clone()) {
                queue.push(bigger.clone());
                out.push(bigger);
            }
        }
    }
    out.push(Subgroup::trivial(group));
    out.sort_by_key(|s| (s.order(), s.indices.clone()));
    Ok(out)
}

/// Random subgroup: the closure of 1–3 uniform elements.
pub fn random_subgroup(group: &AbelianGroup, rng: &mut impl Rng) -> Subgroup {
    let count = rng.gen_range(1..=3usize);
    let gens: Vec<GroupElement> = (0..count)
        .map(|_| group.element_at(rng.gen_range(0..group.order()) as usize))
        .collect();
    Subgroup::from_generators(group, &gens).expect("elements drawn from the group")
}
