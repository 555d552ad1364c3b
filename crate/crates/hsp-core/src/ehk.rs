//! Information-theoretic hidden-subgroup distinguishing on explicit
//! small groups: m-fold tensor products of random coset states, the
//! subgroup projectors P_K, the ±1 measurement cascade over cyclic
//! subgroups, and the error-accumulation bounds that make the cascade
//! succeed with probability ≥ 1 − 2|G|/2^{m/2}.
//!
//! States live in a sum-of-product-terms representation: each term is
//! a coefficient times m factor vectors of dimension |G|. Projectors
//! act factor-wise (one term stays one term); complement branches
//! split each term in two; proportional terms are merged and tiny ones
//! pruned, keeping |G| sequential measurements tractable without
//! |G|^m dense storage.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::statevec::C_ZERO;
use crate::{rng, Error, Result};

/// Hard ceiling on the sum-of-products term count.
pub const TERM_CAP: usize = 1 << 16;
/// Dense cross-checks allowed while |G|^m stays within this.
pub const DENSE_PRODUCT_CAP: u128 = 1 << 20;
/// Group tables are validated exhaustively; keep them desk-scale.
pub const TABLE_CAP: usize = 1024;
/// Subgroup lattices are materialized only this far.
pub const LATTICE_CAP: usize = 24;

// ---------------------------------------------------------------------
// Explicit finite groups.

/// A finite group as a Cayley table. Associativity, identity, and
/// inverse laws are checked exhaustively at construction.
#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    n: usize,
    /// Flat row-major table: mul(a,b) = table[a·n + b].
    table: Vec<u16>,
    inverse: Vec<u16>,
    identity: usize,
    names: Vec<String>,
}

impl FiniteGroupTable {
    pub fn new(table_rows: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let n = table_rows.len();
        if n == 0 || n > TABLE_CAP {
            return Err(Error::capability(format!(
                "group tables supported for 1 ≤ n ≤ {TABLE_CAP}, got {n}"
            )));
        }
        let mut table = vec![0u16; n * n];
        for (a, row) in table_rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::domain(format!("row {a} has length {}", row.len())));
            }
            for (b, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::domain(format!("entry {v} out of range at ({a},{b})")));
                }
                table[a * n + b] = v as u16;
            }
        }
        // Identity: a two-sided unit.
        let identity = (0..n)
            .find(|&e| {
                (0..n).all(|x| table[e * n + x] as usize == x && table[x * n + e] as usize == x)
            })
            .ok_or_else(|| Error::domain("table has no identity element"))?;
        // Inverses.
        let mut inverse = vec![u16::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a * n + b] as usize == identity) {
                Some(b) if table[b * n + a] as usize == identity => inverse[a] = b as u16,
                _ => {
                    return Err(Error::domain(format!("element {a} has no two-sided inverse")))
                }
            }
        }
        // Associativity, exhaustively.
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b] as usize;
                for c in 0..n {
                    let bc = table[b * n + c] as usize;
                    if table[ab * n + c] != table[a * n + bc] {
                        return Err(Error::domain(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let names = match names {
            Some(v) if v.len() == n => v,
            Some(v) => {
                return Err(Error::domain(format!(
                    "{} names for {n} elements",
                    v.len()
                )))
            }
            None => (0..n).map(|i| format!("g{i}")).collect(),
        };
        Ok(FiniteGroupTable {
            n,
            table,
            inverse,
            identity,
            names,
        })
    }

    /// Text format: first line n, then n lines of n space-separated
    /// indices.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::domain("empty table text"))?
            .trim()
            .parse()
            .map_err(|_| Error::domain("first line must be the group order"))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::domain(format!("expected {n} table rows")))?;
            let row: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::domain(format!("bad index {t:?}"))))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        FiniteGroupTable::new(rows, None)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
        FiniteGroupTable::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for a in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|b| self.table[a * self.n + b].to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    /// ⟨g⟩: the powers of g.
    pub fn cyclic_subgroup(&self, g: usize) -> Vec<usize> {
        let mut out = vec![self.identity];
        let mut cur = g;
        while cur != self.identity {
            out.push(cur);
            cur = self.mul(cur, g);
        }
        out.sort_unstable();
        out
    }

    /// Closure of a generating set under multiplication (inverses come
    /// free in a finite group).
    pub fn closure(&self, generators: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[self.identity] = true;
        let mut queue = vec![self.identity];
        let mut head = 0;
        while head < queue.len() {
            let cur = queue[head];
            head += 1;
            for &g in generators {
                let next = self.mul(cur, g);
                if !seen[next] {
                    seen[next] = true;
                    queue.push(next);
                }
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    /// True iff the sorted element set is a subgroup.
    pub fn is_subgroup(&self, elements: &[usize]) -> bool {
        if elements.binary_search(&self.identity).is_err() {
            return false;
        }
        elements.iter().all(|&a| {
            elements
                .iter()
                .all(|&b| elements.binary_search(&self.mul(a, b)).is_ok())
        })
    }

    /// Every subgroup, by closure saturation. Materialized only for
    /// n ≤ 24.
    pub fn subgroups(&self) -> Result<Vec<Vec<usize>>> {
        if self.n > LATTICE_CAP {
            return Err(Error::capability(format!(
                "subgroup lattice materialized only for n ≤ {LATTICE_CAP}, got {}",
                self.n
            )));
        }
        let mut seen = std::collections::HashSet::new();
        let trivial = vec![self.identity];
        seen.insert(trivial.clone());
        let mut queue: Vec<(Vec<usize>, Vec<usize>)> = vec![(trivial.clone(), vec![])];
        let mut out = vec![trivial];
        while let Some((elements, gens)) = queue.pop() {
            for g in 0..self.n {
                if elements.binary_search(&g).is_ok() {
                    continue;
                }
                let mut bigger_gens = gens.clone();
                bigger_gens.push(g);
                let bigger = self.closure(&bigger_gens);
                if seen.insert(bigger.clone()) {
                    out.push(bigger.clone());
                    queue.push((bigger, bigger_gens));
                }
            }
        }
        out.sort_by_key(|s| (s.len(), s.clone()));
        Ok(out)
    }

    /// Canonical left-coset labels for a subgroup: label(u) = least
    /// element of uK.
    pub fn left_coset_labels(&self, sub: &[usize]) -> Vec<u32> {
        let mut labels = vec![u32::MAX; self.n];
        for u in 0..self.n {
            if labels[u] != u32::MAX {
                continue;
            }
            for &k in sub {
                labels[self.mul(u, k)] = u as u32;
            }
        }
        labels
    }

    // -- bundled groups ------------------------------------------------

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("cyclic group needs n ≥ 1"));
        }
        let rows = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        let names = (0..n).map(|i| format!("a{i}")).collect();
        FiniteGroupTable::new(rows, Some(names))
    }

    pub fn direct_product(a: &FiniteGroupTable, b: &FiniteGroupTable) -> Result<Self> {
        let n = a.n * b.n;
        if n > TABLE_CAP {
            return Err(Error::capability(format!("product order {n} over cap")));
        }
        let idx = |x: usize, y: usize| x * b.n + y;
        let mut rows = vec![vec![0usize; n]; n];
        let mut names = vec![String::new(); n];
        for x1 in 0..a.n {
            for y1 in 0..b.n {
                names[idx(x1, y1)] = format!("({},{})", a.names[x1], b.names[y1]);
                for x2 in 0..a.n {
                    for y2 in 0..b.n {
                        rows[idx(x1, y1)][idx(x2, y2)] = idx(a.mul(x1, x2), b.mul(y1, y2));
                    }
                }
            }
        }
        FiniteGroupTable::new(rows, Some(names))
    }

    /// S_n as a table over lexicographically ordered permutations,
    /// composing as (p·q)(x) = p(q(x)). n ≤ 6.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::capability(format!(
                "symmetric group tables supported for 1 ≤ n ≤ 6, got {n}"
            )));
        }
        let perms = all_permutations(n);
        let index: std::collections::HashMap<Vec<usize>, usize> = perms
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let rows: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| {
                        let composed: Vec<usize> = (0..n).map(|x| p[q[x]]).collect();
                        index[&composed]
                    })
                    .collect()
            })
            .collect();
        let names = perms
            .iter()
            .map(|p| {
                let digits: Vec<String> = p.iter().map(usize::to_string).collect();
                format!("[{}]", digits.join(""))
            })
            .collect();
        FiniteGroupTable::new(rows, Some(names))
    }

    /// All permutations of 0..n in the lexicographic order used by
    /// [`FiniteGroupTable::symmetric`] (index i here is element i there).
    pub fn permutations(n: usize) -> Vec<Vec<usize>> {
        all_permutations(n)
    }

    pub fn s3() -> Self {
        FiniteGroupTable::symmetric(3).expect("n = 3 within cap")
    }

    /// Dihedral group of order 8: r^a s^b with s r s = r⁻¹; index b·4+a.
    pub fn d4() -> Self {
        let idx = |a: usize, b: usize| b * 4 + a;
        let mut rows = vec![vec![0usize; 8]; 8];
        for a1 in 0..4 {
            for b1 in 0..2 {
                for a2 in 0..4 {
                    for b2 in 0..2 {
                        let a = if b1 == 1 { (a1 + 4 - a2) % 4 } else { (a1 + a2) % 4 };
                        rows[idx(a1, b1)][idx(a2, b2)] = idx(a, b1 ^ b2);
                    }
                }
            }
        }
        let names = ["e", "r", "r2", "r3", "s", "sr", "sr2", "sr3"]
            .map(String::from)
            .to_vec();
        FiniteGroupTable::new(rows, Some(names)).expect("valid dihedral table")
    }

    /// Quaternion group {±1, ±i, ±j, ±k}; index 2·unit + sign.
    pub fn q8() -> Self {
        // unit ∈ {1,i,j,k} = 0..4; products carry a sign.
        let unit_mul = |u: usize, v: usize| -> (usize, bool) {
            match (u, v) {
                (0, x) => (x, false),
                (x, 0) => (x, false),
                (x, y) if x == y => (0, true),
                (1, 2) => (3, false),
                (2, 3) => (1, false),
                (3, 1) => (2, false),
                (2, 1) => (3, true),
                (3, 2) => (1, true),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        let idx = |u: usize, neg: bool| 2 * u + usize::from(neg);
        let mut rows = vec![vec![0usize; 8]; 8];
        for u in 0..4 {
            for nu in [false, true] {
                for v in 0..4 {
                    for nv in [false, true] {
                        let (w, nw) = unit_mul(u, v);
                        rows[idx(u, nu)][idx(v, nv)] = idx(w, nw ^ nu ^ nv);
                    }
                }
            }
        }
        let names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
            .map(String::from)
            .to_vec();
        FiniteGroupTable::new(rows, Some(names)).expect("valid quaternion table")
    }

    /// Bundled tables by name: Z1..Z8, Z2xZ2, S3, D4, Q8.
    pub fn bundled(name: &str) -> Result<Self> {
        match name {
            "Z2xZ2" => {
                let z2 = FiniteGroupTable::cyclic(2)?;
                FiniteGroupTable::direct_product(&z2, &z2)
            }
            "S3" => Ok(FiniteGroupTable::s3()),
            "D4" => Ok(FiniteGroupTable::d4()),
            "Q8" => Ok(FiniteGroupTable::q8()),
            _ => {
                if let Some(num) = name.strip_prefix('Z') {
                    let n: usize = num
                        .parse()
                        .map_err(|_| Error::domain(format!("unknown group table {name:?}")))?;
                    if n >= 1 && n <= 8 {
                        return FiniteGroupTable::cyclic(n);
                    }
                }
                Err(Error::domain(format!("unknown group table {name:?}")))
            }
        }
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        // Ascending choice at each position gives lexicographic order.
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

// ---------------------------------------------------------------------
// Coset oracles over explicit tables.

/// Left-coset-separating oracle on a table group: f(g₁) = f(g₂) ⟺
/// g₁K = g₂K, with canonical least-element labels.
#[derive(Debug, Clone)]
pub struct TableCosetOracle {
    labels: Vec<u32>,
    hidden: Vec<usize>,
    distinct: usize,
}

impl TableCosetOracle {
    pub fn new(table: &FiniteGroupTable, hidden: Vec<usize>) -> Result<Self> {
        let mut hidden = hidden;
        hidden.sort_unstable();
        hidden.dedup();
        if !table.is_subgroup(&hidden) {
            return Err(Error::domain("hidden set is not a subgroup"));
        }
        let labels = table.left_coset_labels(&hidden);
        let distinct = table.order() / hidden.len();
        Ok(TableCosetOracle {
            labels,
            hidden,
            distinct,
        })
    }

    /// Wraps an arbitrary labelling, verifying the separation
    /// biconditional f(u) = f(v) ⟺ u⁻¹v ∈ K exhaustively.
    pub fn from_labels(
        table: &FiniteGroupTable,
        labels: Vec<u32>,
        hidden: Vec<usize>,
    ) -> Result<Self> {
        let mut hidden = hidden;
        hidden.sort_unstable();
        hidden.dedup();
        if labels.len() != table.order() {
            return Err(Error::DimMismatch(labels.len(), table.order()));
        }
        if !table.is_subgroup(&hidden) {
            return Err(Error::domain("hidden set is not a subgroup"));
        }
        for u in 0..table.order() {
            for v in 0..table.order() {
                let same_coset = hidden
                    .binary_search(&table.mul(table.inv(u), v))
                    .is_ok();
                if (labels[u] == labels[v]) != same_coset {
                    return Err(Error::domain(format!(
                        "labels break coset separation at ({u},{v})"
                    )));
                }
            }
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let distinct = sorted.len();
        Ok(TableCosetOracle {
            labels,
            hidden,
            distinct,
        })
    }

    pub fn label(&self, g: usize) -> u32 {
        self.labels[g]
    }

    pub fn label_count(&self) -> usize {
        self.distinct
    }

    /// Construction-time subgroup, for verification.
    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }
}

// ---------------------------------------------------------------------
// Product states.

#[derive(Debug, Clone)]
struct Term {
    coeff: Complex64,
    factors: Vec<Vec<Complex64>>,
}

/// A vector in (C^{|G|})^{⊗m} kept as a sum of product terms.
#[derive(Debug, Clone)]
pub struct ProductState {
    m: usize,
    dim: usize,
    terms: Vec<Term>,
}

impl ProductState {
    pub fn new(
        m: usize,
        dim: usize,
        terms: Vec<(Complex64, Vec<Vec<Complex64>>)>,
    ) -> Result<Self> {
        if m == 0 || dim == 0 {
            return Err(Error::domain("need m ≥ 1 factors of dimension ≥ 1"));
        }
        for (_, factors) in &terms {
            if factors.len() != m {
                return Err(Error::domain(format!(
                    "term has {} factors, expected {m}",
                    factors.len()
                )));
            }
            if factors.iter().any(|f| f.len() != dim) {
                return Err(Error::domain("factor dimension mismatch"));
            }
        }
        Ok(ProductState {
            m,
            dim,
            terms: terms
                .into_iter()
                .map(|(coeff, factors)| Term { coeff, factors })
                .collect(),
        })
    }

    pub fn copies(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// ⟨self|other⟩ by Gram accumulation over term pairs.
    pub fn inner(&self, other: &ProductState) -> Result<Complex64> {
        if self.m != other.m || self.dim != other.dim {
            return Err(Error::DimMismatch(self.m * self.dim, other.m * other.dim));
        }
        let mut acc = C_ZERO;
        for ta in &self.terms {
            for tb in &other.terms {
                let mut prod = ta.coeff.conj() * tb.coeff;
                for (fa, fb) in ta.factors.iter().zip(&tb.factors) {
                    if prod == C_ZERO {
                        break;
                    }
                    let dot: Complex64 =
                        fa.iter().zip(fb).map(|(x, y)| x.conj() * y).sum();
                    prod *= dot;
                }
                acc += prod;
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).expect("same shape").re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        for t in &mut self.terms {
            t.coeff *= c;
        }
    }

    /// self + other (term concatenation; call [`ProductState::compact`]
    /// afterwards when growth matters).
    pub fn add(&self, other: &ProductState) -> Result<ProductState> {
        if self.m != other.m || self.dim != other.dim {
            return Err(Error::DimMismatch(self.m * self.dim, other.m * other.dim));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(ProductState {
            m: self.m,
            dim: self.dim,
            terms,
        })
    }

    /// Dense expansion (row-major over factor indices); capped at
    /// dim^m ≤ 2²⁰ entries.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let total = (self.dim as u128).pow(self.m as u32);
        if total > DENSE_PRODUCT_CAP {
            return Err(Error::capability(format!(
                "dense expansion needs {total} entries, cap {DENSE_PRODUCT_CAP}"
            )));
        }
        let total = total as usize;
        let mut out = vec![C_ZERO; total];
        for t in &self.terms {
            for (idx, slot) in out.iter_mut().enumerate() {
                let mut v = t.coeff;
                let mut rest = idx;
                // Row-major: factor 0 most significant.
                for f in 0..self.m {
                    let pos = rest / self.dim.pow((self.m - 1 - f) as u32);
                    rest %= self.dim.pow((self.m - 1 - f) as u32);
                    v *= t.factors[f][pos];
                    if v == C_ZERO {
                        break;
                    }
                }
                *slot += v;
            }
        }
        Ok(out)
    }

    /// Applies P⊗…⊗P with the given single-copy projector.
    pub fn apply_projector(&self, proj: &SubgroupProjector) -> ProductState {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff,
                factors: t.factors.iter().map(|f| proj.apply_factor(f)).collect(),
            })
            .collect();
        ProductState {
            m: self.m,
            dim: self.dim,
            terms,
        }
    }

    /// Merges proportional terms, prunes coefficients below 1e−14, and
    /// enforces the term cap.
    pub fn compact(&mut self) -> Result<()> {
        // Canonical form: unit factors, first significant entry made
        // positive real, scale folded into the coefficient.
        let mut canon: Vec<Term> = Vec::with_capacity(self.terms.len());
        'terms: for t in &self.terms {
            let mut coeff = t.coeff;
            let mut factors = t.factors.clone();
            for f in &mut factors {
                let norm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-14 {
                    continue 'terms;
                }
                let lead = f
                    .iter()
                    .find(|x| x.norm() > 1e-12 * norm)
                    .copied()
                    .unwrap_or(Complex64::new(1.0, 0.0));
                let phase = lead / lead.norm();
                let inv = phase.conj() / norm;
                for x in f.iter_mut() {
                    *x *= inv;
                }
                coeff *= norm * phase;
            }
            if coeff.norm() < 1e-14 {
                continue;
            }
            canon.push(Term { coeff, factors });
        }

        // Bucket by a quantized key; verify true closeness before
        // merging (missed merges are harmless).
        let mut buckets: std::collections::HashMap<Vec<i64>, Vec<usize>> = Default::default();
        let mut merged: Vec<Term> = Vec::with_capacity(canon.len());
        for term in canon {
            let key: Vec<i64> = term
                .factors
                .iter()
                .flatten()
                .flat_map(|x| [(x.re * 1e9).round() as i64, (x.im * 1e9).round() as i64])
                .collect();
            let slot = buckets.entry(key).or_default();
            let mut absorbed = false;
            for &mi in slot.iter() {
                let close = merged[mi]
                    .factors
                    .iter()
                    .flatten()
                    .zip(term.factors.iter().flatten())
                    .all(|(a, b)| (a - b).norm() < 1e-10);
                if close {
                    merged[mi].coeff += term.coeff;
                    absorbed = true;
                    break;
                }
            }
            if !absorbed {
                slot.push(merged.len());
                merged.push(term);
            }
        }
        merged.retain(|t| t.coeff.norm() >= 1e-14);
        if merged.len() > TERM_CAP {
            return Err(Error::capability(format!(
                "term count {} exceeds cap {TERM_CAP}",
                merged.len()
            )));
        }
        self.terms = merged;
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Subgroup projectors.

/// Single-copy orthogonal projector P_K onto span{|bK⟩}: entries
/// 1/|K| within a left coset, 0 across cosets.
#[derive(Debug, Clone)]
pub struct SubgroupProjector {
    subgroup: Vec<usize>,
    /// Coset id per element, plus members per coset.
    coset_of: Vec<usize>,
    cosets: Vec<Vec<usize>>,
}

impl SubgroupProjector {
    pub fn new(table: &FiniteGroupTable, subgroup: Vec<usize>) -> Result<Self> {
        let mut subgroup = subgroup;
        subgroup.sort_unstable();
        subgroup.dedup();
        if !table.is_subgroup(&subgroup) {
            return Err(Error::domain("projector set is not a subgroup"));
        }
        let labels = table.left_coset_labels(&subgroup);
        let mut ids: Vec<u32> = labels.clone();
        ids.sort_unstable();
        ids.dedup();
        let id_of = |lab: u32| ids.binary_search(&lab).unwrap();
        let mut cosets = vec![Vec::new(); ids.len()];
        let mut coset_of = vec![0usize; table.order()];
        for (u, &lab) in labels.iter().enumerate() {
            let id = id_of(lab);
            coset_of[u] = id;
            cosets[id].push(u);
        }
        Ok(SubgroupProjector {
            subgroup,
            coset_of,
            cosets,
        })
    }

    pub fn subgroup(&self) -> &[usize] {
        &self.subgroup
    }

    /// P applied to one factor: within each coset, replace entries by
    /// their average over the coset (sum / |K|).
    pub fn apply_factor(&self, v: &[Complex64]) -> Vec<Complex64> {
        let k = self.subgroup.len() as f64;
        let mut sums = vec![C_ZERO; self.cosets.len()];
        for (u, &x) in v.iter().enumerate() {
            sums[self.coset_of[u]] += x;
        }
        v.iter()
            .enumerate()
            .map(|(u, _)| sums[self.coset_of[u]] / k)
            .collect()
    }

    /// Dense |G|×|G| form, for verification.
    pub fn matrix(&self) -> Array2<Complex64> {
        let n = self.coset_of.len();
        let k = self.subgroup.len() as f64;
        let mut m = Array2::from_elem((n, n), C_ZERO);
        for u in 0..n {
            for v in 0..n {
                if self.coset_of[u] == self.coset_of[v] {
                    m[(u, v)] = Complex64::new(1.0 / k, 0.0);
                }
            }
        }
        m
    }
}

// ---------------------------------------------------------------------
// Coset states and overlaps.

/// ⊗_{i<m} |a_i H⟩ with uniformly random coset representatives a_i.
pub fn coset_state(
    table: &FiniteGroupTable,
    h: &[usize],
    m: usize,
    rng: &mut impl Rng,
) -> Result<ProductState> {
    let mut h = h.to_vec();
    h.sort_unstable();
    h.dedup();
    if !table.is_subgroup(&h) {
        return Err(Error::domain("coset state needs a subgroup"));
    }
    let n = table.order();
    let amp = Complex64::new(1.0 / (h.len() as f64).sqrt(), 0.0);
    let factors: Vec<Vec<Complex64>> = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let mut f = vec![C_ZERO; n];
            for &hh in &h {
                f[table.mul(a, hh)] = amp;
            }
            f
        })
        .collect();
    ProductState::new(m, n, vec![(Complex64::new(1.0, 0.0), factors)])
}

/// ⟨Ψ|P_K^{⊗m}|Ψ⟩ / ⟨Ψ|Ψ⟩, computed in the product representation.
/// For Ψ built from coset states of H this equals (|H∩K|/|K|)^m.
pub fn overlap_pk(
    table: &FiniteGroupTable,
    psi: &ProductState,
    k: &[usize],
) -> Result<f64> {
    let proj = SubgroupProjector::new(table, k.to_vec())?;
    let projected = psi.apply_projector(&proj);
    let denom = psi.norm_sqr();
    if denom < 1e-300 {
        return Err(Error::domain("zero state has no overlap"));
    }
    Ok(projected.norm_sqr() / denom)
}

// ---------------------------------------------------------------------
// The measurement cascade.

/// Result of one distinguishing run.
#[derive(Debug, Clone)]
pub struct EhkOutcome {
    /// Elements confirmed or implied to lie in H (sorted): the
    /// recovered subgroup candidate.
    pub recovered: Vec<usize>,
    /// (element, outcome) for every measurement actually performed.
    pub outcomes: Vec<(usize, bool)>,
    /// Elements accepted without measurement (already in the closure
    /// of confirmed members).
    pub implied: Vec<usize>,
    /// Oracle-call accounting: the m state preparations.
    pub oracle_calls: usize,
    /// Peak term count reached by the product representation.
    pub max_terms: usize,
}

/// Runs the ±1 cascade: prepare Ψ from m random coset states of the
/// oracle's hidden subgroup, then for each g in table order (skipping
/// implied members) measure A_{⟨g⟩} and collect the +1 elements.
pub fn ehk_run(
    table: &FiniteGroupTable,
    oracle: &TableCosetOracle,
    m: usize,
    seed: u64,
) -> Result<EhkOutcome> {
    let mut rng = rng::master_rng(seed);
    ehk_run_with(table, oracle, m, &mut rng)
}

pub fn ehk_run_with(
    table: &FiniteGroupTable,
    oracle: &TableCosetOracle,
    m: usize,
    rng: &mut impl Rng,
) -> Result<EhkOutcome> {
    if m == 0 {
        return Err(Error::domain("need at least one coset-state copy"));
    }
    let n = table.order();
    // State preparation through the oracle's labels: a random a gives
    // the uniform superposition over {u : f(u) = f(a)} = aH.
    let one = Complex64::new(1.0, 0.0);
    let factors: Vec<Vec<Complex64>> = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let members: Vec<usize> =
                (0..n).filter(|&u| oracle.label(u) == oracle.label(a)).collect();
            let amp = Complex64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
            let mut f = vec![C_ZERO; n];
            for u in members {
                f[u] = amp;
            }
            f
        })
        .collect();
    let mut psi = ProductState::new(m, n, vec![(one, factors)])?;
    let mut max_terms = psi.term_count();

    let mut confirmed: Vec<usize> = vec![table.identity()];
    let mut closure = table.closure(&confirmed);
    let mut outcomes = Vec::new();
    let mut implied = Vec::new();
    for g in 0..n {
        if g == table.identity() {
            continue;
        }
        if closure.binary_search(&g).is_ok() {
            implied.push(g);
            continue;
        }
        let proj = SubgroupProjector::new(table, table.cyclic_subgroup(g))?;
        let projected = psi.apply_projector(&proj);
        let denom = psi.norm_sqr();
        let p_plus = (projected.norm_sqr() / denom).clamp(0.0, 1.0);
        let plus = rng.gen::<f64>() < p_plus;
        outcomes.push((g, plus));
        if plus {
            psi = projected;
            psi.scale(Complex64::new(1.0 / p_plus.sqrt() / denom.sqrt(), 0.0));
            confirmed.push(g);
            closure = table.closure(&confirmed);
        } else {
            let mut neg = projected;
            neg.scale(Complex64::new(-1.0, 0.0));
            psi = psi.add(&neg)?;
            let norm = psi.norm();
            if norm > 1e-150 {
                psi.scale(Complex64::new(1.0 / norm, 0.0));
            }
        }
        psi.compact()?;
        max_terms = max_terms.max(psi.term_count());
    }
    let mut recovered = closure;
    recovered.sort_unstable();
    Ok(EhkOutcome {
        recovered,
        outcomes,
        implied,
        oracle_calls: m,
        max_terms,
    })
}

/// Trace of the deterministic correct-branch cascade: after each
/// measured step i the deviation E_i = Ψ_i − Ψ₀ satisfies
/// ⟨E_i|E_i⟩ ≤ i²/2^m, and the final squared norm (the success
/// probability of the whole cascade) is ≥ 1 − 2|G|/2^{m/2}.
#[derive(Debug, Clone)]
pub struct ErrorAccumulation {
    /// ⟨E_i|E_i⟩ after each measured step (index 0 = before any step).
    pub error_norms: Vec<f64>,
    /// ⟨Ψ_final|Ψ_final⟩.
    pub final_fidelity: f64,
    /// 1 − 2|G|/2^{m/2}.
    pub fidelity_bound: f64,
    pub copies: usize,
}

pub fn error_accumulation_check(
    table: &FiniteGroupTable,
    h: &[usize],
    m: usize,
    seed: u64,
) -> Result<ErrorAccumulation> {
    let mut rng = rng::master_rng(seed);
    let psi0 = coset_state(table, h, m, &mut rng)?;
    let mut h_sorted = h.to_vec();
    h_sorted.sort_unstable();
    h_sorted.dedup();

    let mut psi = psi0.clone();
    let mut error_norms = vec![0.0];
    let mut confirmed: Vec<usize> = vec![table.identity()];
    let mut closure = table.closure(&confirmed);
    for g in 0..table.order() {
        if g == table.identity() || closure.binary_search(&g).is_ok() {
            continue;
        }
        let proj = SubgroupProjector::new(table, table.cyclic_subgroup(g))?;
        let projected = psi.apply_projector(&proj);
        if h_sorted.binary_search(&g).is_ok() {
            // Correct branch +1: P fixes Ψ exactly (K ≤ H).
            psi = projected;
            confirmed.push(g);
            closure = table.closure(&confirmed);
        } else {
            // Correct branch −1: Ψ ← (I − P)Ψ, unnormalized.
            let mut neg = projected;
            neg.scale(Complex64::new(-1.0, 0.0));
            psi = psi.add(&neg)?;
        }
        psi.compact()?;
        let mut dev = psi0.clone();
        dev.scale(Complex64::new(-1.0, 0.0));
        let e = psi.add(&dev)?;
        error_norms.push(e.norm_sqr());
    }
    let final_fidelity = psi.norm_sqr();
    let fidelity_bound = 1.0 - 2.0 * table.order() as f64 / 2f64.powf(m as f64 / 2.0);
    Ok(ErrorAccumulation {
        error_norms,
        final_fidelity,
        fidelity_bound,
        copies: m,
    })
}
