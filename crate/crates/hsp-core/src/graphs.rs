//! Graph-isomorphism reductions driven by a pluggable decision oracle.
//!
//! The six classical problems (recognition, explicit map, isomorphism
//! count, automorphism count, orbit partition, generator set) reduce to
//! one another through a vertex-labelling gadget: labelling a vertex
//! pins it under every automorphism, so yes/no isomorphism calls on
//! labelled copies answer structural questions about the base graph.
//! [`perm_oracle`] packages a graph as a coset-separating function on a
//! symmetric group, which the [`crate::ehk`] machinery can consume.

use std::cell::Cell;
use std::collections::HashMap;
use std::path::Path;

use rand::Rng;

use crate::ehk::{FiniteGroupTable, TableCosetOracle};
use crate::{Error, Result};

/// Exhaustive permutation search handles at most this many vertices.
pub const BRUTE_FORCE_CAP: usize = 9;
/// Symmetric-group coset oracles are materialized for at most S₆.
pub const PERM_ORACLE_CAP: usize = 6;
/// Exhaustive non-isomorphic enumeration handles at most this many vertices.
pub const CORPUS_CAP: usize = 6;
/// Permutation-closure size guard.
pub const CLOSURE_CAP: usize = 1 << 20;

/// Simple undirected graph: sorted edge list of sorted pairs plus
/// sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and canonicalizes: pairs sorted, list sorted, no loops
    /// or duplicates, endpoints in range.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Graph> {
        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::domain(format!("loop at vertex {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        let before = canon.len();
        canon.dedup();
        if canon.len() != before {
            return Err(Error::domain("duplicate edge"));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &canon {
            adj[u].push(v);
            adj[v].push(u);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Parses "n m" followed by m lines "u v" (0-based).
    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::domain("empty graph file"))?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::domain("bad vertex count"))?;
        let m: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::domain("bad edge count"))?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut ends = line.split_whitespace();
            let u: usize = ends
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::domain(format!("bad edge line: {line}")))?;
            let v: usize = ends
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::domain(format!("bad edge line: {line}")))?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::domain(format!(
                "header promises {m} edges, file has {}",
                edges.len()
            )));
        }
        Graph::new(n, edges)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Graph> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::domain(format!("read {}: {e}", path.as_ref().display())))?;
        Graph::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn complement(&self) -> Graph {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.n, edges).expect("complement edges valid by construction")
    }

    /// Disjoint union; the other graph's vertices are shifted by `self.n`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut edges = self.edges.clone();
        edges.extend(
            other
                .edges
                .iter()
                .map(|&(u, v)| (u + self.n, v + self.n)),
        );
        Graph::new(self.n + other.n, edges).expect("union edges valid by construction")
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Relabels vertices: vertex v becomes perm[v].
    pub fn apply_permutation(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::DimMismatch(perm.len(), self.n));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::domain("not a permutation"));
            }
            seen[p] = true;
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Graph::new(self.n, edges)
    }
}

/// Returns true when `map` is an edge-preserving bijection a → b.
pub fn verify_isomorphism(a: &Graph, b: &Graph, map: &[usize]) -> bool {
    if map.len() != a.n || a.n != b.n || a.edges.len() != b.edges.len() {
        return false;
    }
    let mut seen = vec![false; a.n];
    for &m in map {
        if m >= a.n || seen[m] {
            return false;
        }
        seen[m] = true;
    }
    a.edges.iter().all(|&(u, v)| b.has_edge(map[u], map[v]))
}

// ------------------------------------------------------------------
// Labelling gadget.

/// A base graph with pendant label gadgets attached; automorphisms of
/// the result fix every labelled vertex.
#[derive(Debug, Clone)]
pub struct LabelledGraph {
    graph: Graph,
    base: usize,
    labelled: Vec<usize>,
}

impl LabelledGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn base_vertex_count(&self) -> usize {
        self.base
    }

    pub fn labelled(&self) -> &[usize] {
        &self.labelled
    }
}

/// Attaches label m to the m-th listed vertex (m = 1, 2, …): a pendant
/// path of n+1 vertices, a branch vertex, then one arm of n+1 vertices
/// and one arm of m vertices, adding 2n+m+3 vertices per label (n is
/// the base vertex count, fixed across labels).
pub fn attach_labels(base: &Graph, vertices: &[usize]) -> Result<LabelledGraph> {
    let n = base.n;
    for (i, &v) in vertices.iter().enumerate() {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, dim: n });
        }
        if vertices[..i].contains(&v) {
            return Err(Error::domain(format!("vertex {v} labelled twice")));
        }
    }
    let mut edges = base.edges.clone();
    let mut next = n;
    for (idx, &v) in vertices.iter().enumerate() {
        let m = idx + 1;
        let mut chain = |from: usize, len: usize, edges: &mut Vec<(usize, usize)>| {
            let mut prev = from;
            for _ in 0..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            prev
        };
        let tail = chain(v, n + 1, &mut edges);
        let branch = chain(tail, 1, &mut edges);
        chain(branch, n + 1, &mut edges);
        chain(branch, m, &mut edges);
    }
    Ok(LabelledGraph {
        graph: Graph::new(next, edges)?,
        base: n,
        labelled: vertices.to_vec(),
    })
}

// ------------------------------------------------------------------
// Decision oracles.

/// A yes/no isomorphism decision procedure.
pub trait IsoDecider {
    fn decide(&self, a: &Graph, b: &Graph) -> Result<bool>;
}

/// Call-counting wrapper the reductions consume.
pub struct IsoOracle {
    decider: Box<dyn IsoDecider>,
    calls: Cell<u64>,
}

impl IsoOracle {
    pub fn new(decider: Box<dyn IsoDecider>) -> IsoOracle {
        IsoOracle {
            decider,
            calls: Cell::new(0),
        }
    }

    /// Exact color-refinement decider; any instance size.
    pub fn refinement() -> IsoOracle {
        IsoOracle::new(Box::new(RefinementIso))
    }

    /// Exhaustive decider; at most [`BRUTE_FORCE_CAP`] vertices.
    pub fn brute_force() -> IsoOracle {
        IsoOracle::new(Box::new(BruteForceIso))
    }

    pub fn decide(&self, a: &Graph, b: &Graph) -> Result<bool> {
        self.calls.set(self.calls.get() + 1);
        self.decider.decide(a, b)
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn reset_calls(&self) {
        self.calls.set(0);
    }
}

/// Backtracking over vertex bijections with adjacency pruning.
pub struct BruteForceIso;

impl IsoDecider for BruteForceIso {
    fn decide(&self, a: &Graph, b: &Graph) -> Result<bool> {
        Ok(brute_force_iso(a, b)?.is_some())
    }
}

/// Iterated color refinement with individualization and final edge
/// verification; exact on every input.
pub struct RefinementIso;

impl IsoDecider for RefinementIso {
    fn decide(&self, a: &Graph, b: &Graph) -> Result<bool> {
        Ok(refinement_decide(a, b))
    }
}

fn brute_search(
    a: &Graph,
    b: &Graph,
    map: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    first_only: bool,
) -> bool {
    let i = map.len();
    if i == a.n {
        out.push(map.clone());
        return first_only;
    }
    for u in 0..b.n {
        if used[u] || a.degree(i) != b.degree(u) {
            continue;
        }
        if (0..i).any(|j| a.has_edge(j, i) != b.has_edge(map[j], u)) {
            continue;
        }
        map.push(u);
        used[u] = true;
        if brute_search(a, b, map, used, out, first_only) {
            return true;
        }
        map.pop();
        used[u] = false;
    }
    false
}

fn brute_cap(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::capability(format!(
            "brute force handles at most {BRUTE_FORCE_CAP} vertices, got {n}"
        )));
    }
    Ok(())
}

/// Exhaustive isomorphism search; returns a witness bijection.
pub fn brute_force_iso(a: &Graph, b: &Graph) -> Result<Option<Vec<usize>>> {
    brute_cap(a.n.max(b.n))?;
    if a.n != b.n || a.edges.len() != b.edges.len() {
        return Ok(None);
    }
    let mut da: Vec<usize> = (0..a.n).map(|v| a.degree(v)).collect();
    let mut db: Vec<usize> = (0..b.n).map(|v| b.degree(v)).collect();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(None);
    }
    let mut out = Vec::new();
    let mut map = Vec::with_capacity(a.n);
    let mut used = vec![false; a.n];
    brute_search(a, b, &mut map, &mut used, &mut out, true);
    Ok(out.into_iter().next())
}

/// Every automorphism of g, by exhaustive search.
pub fn brute_force_automorphisms(g: &Graph) -> Result<Vec<Vec<usize>>> {
    brute_cap(g.n)?;
    let mut out = Vec::new();
    let mut map = Vec::with_capacity(g.n);
    let mut used = vec![false; g.n];
    brute_search(g, g, &mut map, &mut used, &mut out, false);
    Ok(out)
}

// ------------------------------------------------------------------
// Color refinement.

fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn refine_once(g: &Graph, colors: &[u64]) -> Vec<u64> {
    (0..g.n)
        .map(|v| {
            let mut s = 0u64;
            for &u in &g.adj[v] {
                // Forced-odd summands keep equal-degree sums injective
                // in the degree for a uniform start.
                s = s.wrapping_add(mix(colors[u]) | 1);
            }
            mix(colors[v].wrapping_mul(0x2545_F491_4F6C_DD1D) ^ s)
        })
        .collect()
}

fn distinct_count(colors: &[u64]) -> usize {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len()
}

/// Stable vertex colors: equal colors are necessary for two vertices
/// to share an automorphism orbit, so unequal colors prune candidate
/// tests soundly.
fn stable_colors(g: &Graph) -> Vec<u64> {
    let mut colors = vec![0u64; g.n];
    let mut prev = distinct_count(&colors);
    for _ in 0..g.n + 2 {
        let next = refine_once(g, &colors);
        let d = distinct_count(&next);
        colors = next;
        if d <= prev {
            break;
        }
        prev = d;
    }
    colors
}

fn same_histogram(ca: &[u64], cb: &[u64]) -> bool {
    let mut a = ca.to_vec();
    let mut b = cb.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn refine_pair_to_stable(a: &Graph, b: &Graph, ca: &mut Vec<u64>, cb: &mut Vec<u64>) -> bool {
    if !same_histogram(ca, cb) {
        return false;
    }
    let mut prev = distinct_count(ca);
    for _ in 0..a.n + 2 {
        let na = refine_once(a, ca);
        let nb = refine_once(b, cb);
        if !same_histogram(&na, &nb) {
            return false;
        }
        let d = distinct_count(&na);
        *ca = na;
        *cb = nb;
        if d <= prev {
            return true;
        }
        prev = d;
    }
    true
}

fn iso_search(a: &Graph, b: &Graph, mut ca: Vec<u64>, mut cb: Vec<u64>, depth: u64) -> bool {
    if !refine_pair_to_stable(a, b, &mut ca, &mut cb) {
        return false;
    }
    let mut classes: HashMap<u64, Vec<usize>> = HashMap::new();
    for (v, &c) in ca.iter().enumerate() {
        classes.entry(c).or_default().push(v);
    }
    if classes.values().all(|vs| vs.len() == 1) {
        // Discrete coloring: match by color, then verify edges; the
        // verification makes the procedure exact even if the multiset
        // hashing ever collided.
        let mut pa: Vec<(u64, usize)> = ca.iter().copied().zip(0..a.n).collect();
        let mut pb: Vec<(u64, usize)> = cb.iter().copied().zip(0..b.n).collect();
        pa.sort_unstable();
        pb.sort_unstable();
        let mut map = vec![0usize; a.n];
        for (x, y) in pa.iter().zip(&pb) {
            map[x.1] = y.1;
        }
        return a.edges.iter().all(|&(u, v)| b.has_edge(map[u], map[v]));
    }
    let (&color, members) = classes
        .iter()
        .filter(|(_, vs)| vs.len() > 1)
        .min_by_key(|(c, vs)| (vs.len(), **c))
        .expect("a non-singleton class exists");
    let v = *members.iter().min().expect("class non-empty");
    let spike = mix(0x51E5_D00D ^ depth);
    for u in 0..b.n {
        if cb[u] != color {
            continue;
        }
        let mut ca2 = ca.clone();
        let mut cb2 = cb.clone();
        ca2[v] = spike;
        cb2[u] = spike;
        if iso_search(a, b, ca2, cb2, depth + 1) {
            return true;
        }
    }
    false
}

fn refinement_decide(a: &Graph, b: &Graph) -> bool {
    if a.n != b.n || a.edges.len() != b.edges.len() {
        return false;
    }
    if a.n == 0 {
        return true;
    }
    iso_search(a, b, vec![0; a.n], vec![0; b.n], 0)
}

// ------------------------------------------------------------------
// Reductions to the decision oracle.

/// Explicit isomorphism map, found by fixing vertices one at a time
/// with identically labelled copies. At most n(n+1)/2 oracle calls.
pub fn imap_via_iso(g1: &Graph, g2: &Graph, oracle: &IsoOracle) -> Result<Option<Vec<usize>>> {
    if g1.n != g2.n || g1.edges.len() != g2.edges.len() {
        return Ok(None);
    }
    let n = g1.n;
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let mut target: Vec<usize> = Vec::with_capacity(n);
    for j in 0..n {
        let sources: Vec<usize> = (0..=j).collect();
        let left = attach_labels(g1, &sources)?;
        let mut found = None;
        for u in 0..n {
            if target.contains(&u) {
                continue;
            }
            let mut t = target.clone();
            t.push(u);
            let right = attach_labels(g2, &t)?;
            if oracle.decide(left.graph(), right.graph())? {
                found = Some(u);
                break;
            }
        }
        match found {
            Some(u) => target.push(u),
            None => return Ok(None),
        }
    }
    if !verify_isomorphism(g1, g2, &target) {
        return Err(Error::domain(
            "oracle answers produced an inconsistent isomorphism map",
        ));
    }
    Ok(Some(target))
}

/// Per-level orbit sizes d₁..d_n: d_k is the orbit of vertex k−1 under
/// the automorphisms fixing vertices 0..k−2. |aut| = ∏ d_k.
pub fn acount_levels_via_iso(g: &Graph, oracle: &IsoOracle) -> Result<Vec<u64>> {
    let n = g.n;
    let colors = stable_colors(g);
    let mut levels = Vec::with_capacity(n);
    for k in 0..n {
        let mut with_k: Vec<usize> = (0..k).collect();
        with_k.push(k);
        let left = attach_labels(g, &with_k)?;
        let mut d = 1u64;
        for l in k + 1..n {
            if colors[l] != colors[k] {
                continue;
            }
            let mut with_l: Vec<usize> = (0..k).collect();
            with_l.push(l);
            let right = attach_labels(g, &with_l)?;
            if oracle.decide(left.graph(), right.graph())? {
                d += 1;
            }
        }
        levels.push(d);
    }
    Ok(levels)
}

/// |aut g| via the level products; at most n(n−1)/2 oracle calls.
pub fn acount_via_iso(g: &Graph, oracle: &IsoOracle) -> Result<u64> {
    Ok(acount_levels_via_iso(g, oracle)?.iter().product())
}

/// Number of isomorphisms g1 → g2: zero, or |aut g1| when any exists.
pub fn icount_via_iso(g1: &Graph, g2: &Graph, oracle: &IsoOracle) -> Result<u64> {
    if !oracle.decide(g1, g2)? {
        return Ok(0);
    }
    let a1 = acount_via_iso(g1, oracle)?;
    let a2 = acount_via_iso(g2, oracle)?;
    if a1 != a2 {
        return Err(Error::domain(
            "isomorphic graphs reported different automorphism counts",
        ));
    }
    Ok(a1)
}

/// Automorphism orbit partition: u,v share a cell iff the copies with
/// u and v carrying the same label are isomorphic. Cells are sorted
/// and ordered by least member.
pub fn apart_via_iso(g: &Graph, oracle: &IsoOracle) -> Result<Vec<Vec<usize>>> {
    let n = g.n;
    let colors = stable_colors(g);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for u in 0..n {
        for v in u + 1..n {
            if colors[u] != colors[v] {
                continue;
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                continue;
            }
            let left = attach_labels(g, &[u])?;
            let right = attach_labels(g, &[v])?;
            if oracle.decide(left.graph(), right.graph())? {
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
    }
    let mut cells: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        cells.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = cells.into_values().collect();
    for cell in &mut out {
        cell.sort_unstable();
    }
    out.sort();
    Ok(out)
}

fn extend_automorphism(
    g: &Graph,
    mut target: Vec<usize>,
    colors: &[u64],
    oracle: &IsoOracle,
) -> Result<Vec<usize>> {
    let n = g.n;
    for j in target.len()..n {
        let sources: Vec<usize> = (0..=j).collect();
        let left = attach_labels(g, &sources)?;
        let cands: Vec<usize> = (0..n)
            .filter(|w| colors[*w] == colors[j] && !target.contains(w))
            .collect();
        let chosen = if cands.len() == 1 {
            // The true extension shares the stable color and is unused,
            // so a unique candidate needs no oracle call.
            cands[0]
        } else {
            let mut found = None;
            for w in cands {
                let mut t = target.clone();
                t.push(w);
                let right = attach_labels(g, &t)?;
                if oracle.decide(left.graph(), right.graph())? {
                    found = Some(w);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::domain("oracle answers left an automorphism inextensible")
            })?
        };
        target.push(chosen);
    }
    if !verify_isomorphism(g, g, &target) {
        return Err(Error::domain(
            "oracle answers produced a non-automorphism generator",
        ));
    }
    Ok(target)
}

/// Generators of aut g: for every level k, one automorphism per orbit
/// member of vertex k beyond itself. At most n(n−1)/2 generators.
pub fn agen_via_iso(g: &Graph, oracle: &IsoOracle) -> Result<Vec<Vec<usize>>> {
    let n = g.n;
    let colors = stable_colors(g);
    let mut gens = Vec::new();
    for k in 0..n {
        let mut with_k: Vec<usize> = (0..k).collect();
        with_k.push(k);
        let left = attach_labels(g, &with_k)?;
        for l in k + 1..n {
            if colors[l] != colors[k] {
                continue;
            }
            let mut with_l: Vec<usize> = (0..k).collect();
            with_l.push(l);
            let right = attach_labels(g, &with_l)?;
            if oracle.decide(left.graph(), right.graph())? {
                gens.push(extend_automorphism(g, with_l, &colors, oracle)?);
            }
        }
    }
    Ok(gens)
}

/// Closure of a permutation set under composition; includes the
/// identity.
pub fn permutation_closure(n: usize, gens: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    use std::collections::HashSet;
    let identity: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(p) = frontier.pop() {
        for q in gens {
            if q.len() != n {
                return Err(Error::DimMismatch(q.len(), n));
            }
            let composed: Vec<usize> = (0..n).map(|x| p[q[x]]).collect();
            if seen.insert(composed.clone()) {
                if seen.len() > CLOSURE_CAP {
                    return Err(Error::capability(format!(
                        "permutation closure exceeded {CLOSURE_CAP} elements"
                    )));
                }
                frontier.push(composed);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

// ------------------------------------------------------------------
// Reverse reductions: deciding isomorphism from the other problems.

enum ReversePair {
    Mismatch,
    Pair(Graph, Graph),
}

/// Isomorphism of disconnected inputs transfers to complements, which
/// are then connected; mixed connectivity can never be isomorphic.
fn reverse_precheck(g1: &Graph, g2: &Graph) -> ReversePair {
    if g1.n != g2.n || g1.edges.len() != g2.edges.len() {
        return ReversePair::Mismatch;
    }
    match (g1.is_connected(), g2.is_connected()) {
        (true, true) => ReversePair::Pair(g1.clone(), g2.clone()),
        (false, false) => ReversePair::Pair(g1.complement(), g2.complement()),
        _ => ReversePair::Mismatch,
    }
}

/// G₁ ≅ G₂ iff |aut G₁| = |aut G₂| and the union's automorphism count
/// exceeds their product (component swaps double it).
pub fn iso_via_acount(g1: &Graph, g2: &Graph, oracle: &IsoOracle) -> Result<bool> {
    match reverse_precheck(g1, g2) {
        ReversePair::Mismatch => Ok(false),
        ReversePair::Pair(a, b) => {
            let c1 = acount_via_iso(&a, oracle)?;
            let c2 = acount_via_iso(&b, oracle)?;
            let c3 = acount_via_iso(&a.disjoint_union(&b), oracle)?;
            Ok(c1 == c2 && c1 * c2 != c3)
        }
    }
}

/// G₁ ≅ G₂ iff some generator of aut(G₁ ⊔ G₂) moves a vertex across
/// the component split.
pub fn iso_via_agen(g1: &Graph, g2: &Graph, oracle: &IsoOracle) -> Result<bool> {
    match reverse_precheck(g1, g2) {
        ReversePair::Mismatch => Ok(false),
        ReversePair::Pair(a, b) => {
            let n1 = a.n;
            let gens = agen_via_iso(&a.disjoint_union(&b), oracle)?;
            Ok(gens
                .iter()
                .any(|p| p.iter().take(n1).any(|&img| img >= n1)))
        }
    }
}

/// G₁ ≅ G₂ iff some orbit cell of G₁ ⊔ G₂ spans both components.
pub fn iso_via_apart(g1: &Graph, g2: &Graph, oracle: &IsoOracle) -> Result<bool> {
    match reverse_precheck(g1, g2) {
        ReversePair::Mismatch => Ok(false),
        ReversePair::Pair(a, b) => {
            let n1 = a.n;
            let cells = apart_via_iso(&a.disjoint_union(&b), oracle)?;
            Ok(cells
                .iter()
                .any(|cell| cell.iter().any(|&v| v < n1) && cell.iter().any(|&v| v >= n1)))
        }
    }
}

// ------------------------------------------------------------------
// The symmetric-group coset oracle.

/// f(π) = π(G) as a canonical edge-list id. Two permutations collide
/// exactly when they lie in the same left coset of aut G, so the pair
/// (Sₙ table, oracle) feeds the hidden-subgroup machinery directly.
pub fn perm_oracle(g: &Graph) -> Result<(FiniteGroupTable, TableCosetOracle)> {
    let n = g.n;
    if n == 0 || n > PERM_ORACLE_CAP {
        return Err(Error::capability(format!(
            "permutation oracle needs 1..={PERM_ORACLE_CAP} vertices, got {n}"
        )));
    }
    let table = FiniteGroupTable::symmetric(n)?;
    let perms = FiniteGroupTable::permutations(n);
    let mut ids: HashMap<Vec<(usize, usize)>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(perms.len());
    for p in &perms {
        let image = g.apply_permutation(p)?;
        let next = ids.len() as u32;
        labels.push(*ids.entry(image.edges().to_vec()).or_insert(next));
    }
    let hidden: Vec<usize> = (0..perms.len()).filter(|&i| labels[i] == labels[0]).collect();
    let oracle = TableCosetOracle::from_labels(&table, labels, hidden)?;
    Ok((table, oracle))
}

// ------------------------------------------------------------------
// Corpus generation.

/// All non-isomorphic graphs with 1..=max_n vertices, one canonical
/// representative per class (the minimal edge bitmask over all vertex
/// permutations).
pub fn small_graph_corpus(max_n: usize) -> Result<Vec<Graph>> {
    if max_n == 0 || max_n > CORPUS_CAP {
        return Err(Error::capability(format!(
            "corpus enumeration needs 1..={CORPUS_CAP} vertices, got {max_n}"
        )));
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let mut pos = HashMap::new();
        for (idx, &p) in pairs.iter().enumerate() {
            pos.insert(p, idx);
        }
        let perm_maps: Vec<Vec<usize>> = FiniteGroupTable::permutations(n)
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .map(|&(i, j)| pos[&(p[i].min(p[j]), p[i].max(p[j]))])
                    .collect()
            })
            .collect();
        for mask in 0u32..1 << pairs.len() {
            let mut canonical = true;
            for pm in &perm_maps {
                let mut m = mask;
                let mut image = 0u32;
                while m != 0 {
                    let bit = m.trailing_zeros() as usize;
                    image |= 1 << pm[bit];
                    m &= m - 1;
                }
                if image < mask {
                    canonical = false;
                    break;
                }
            }
            if canonical {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| mask >> idx & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect();
                out.push(Graph::new(n, edges)?);
            }
        }
    }
    Ok(out)
}

/// Erdős–Rényi draw: each pair is an edge independently with the given
/// probability.
pub fn random_graph(n: usize, edge_prob: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("sampled edges valid by construction")
}
