mod common;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use hsp_core::ehk::{
    coset_state, ehk_run, error_accumulation_check, overlap_pk, EhkOutcome, FiniteGroupTable,
    ProductState, SubgroupProjector, TableCosetOracle,
};
use hsp_core::rng::master_rng;
use hsp_core::statevec::max_abs_uut_minus_identity;
use hsp_core::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// -------------------------------------------------------------------
// Group tables.

#[test]
fn cyclic_table_basics() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    assert_eq!(z4.order(), 4);
    assert_eq!(z4.identity(), 0);
    assert_eq!(z4.mul(3, 2), 1);
    assert_eq!(z4.inv(1), 3);
    assert_eq!(z4.inv(0), 0);
    assert_eq!(z4.cyclic_subgroup(2), vec![0, 2]);
    assert_eq!(z4.cyclic_subgroup(1), vec![0, 1, 2, 3]);
}

#[test]
fn invalid_tables_rejected() {
    // Non-associative: patch one entry of Z₃.
    let rows = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 1, 0]];
    assert!(FiniteGroupTable::new(rows, None).is_err());
    // f(a,b) = a has no two-sided identity.
    let rows = vec![vec![0, 0], vec![1, 1]];
    assert!(FiniteGroupTable::new(rows, None).is_err());
    // Out-of-range entry.
    let rows = vec![vec![0, 1], vec![1, 5]];
    assert!(FiniteGroupTable::new(rows, None).is_err());
    // Ragged row.
    let rows = vec![vec![0, 1], vec![1]];
    assert!(FiniteGroupTable::new(rows, None).is_err());
}

#[test]
fn text_round_trip() {
    let d4 = FiniteGroupTable::d4();
    let text = d4.to_text();
    let back = FiniteGroupTable::from_text(&text).unwrap();
    assert_eq!(back.order(), 8);
    for a in 0..8 {
        for b in 0..8 {
            assert_eq!(back.mul(a, b), d4.mul(a, b));
        }
    }
    assert!(FiniteGroupTable::from_text("").is_err());
    assert!(FiniteGroupTable::from_text("2\n0 1\n").is_err());
}

#[test]
fn table_file_round_trip() {
    let dir = std::env::temp_dir().join("hsp_ehk_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s3.txt");
    let s3 = FiniteGroupTable::s3();
    std::fs::write(&path, s3.to_text()).unwrap();
    let back = FiniteGroupTable::from_file(&path).unwrap();
    assert_eq!(back.order(), 6);
    assert_eq!(back.mul(1, 2), s3.mul(1, 2));
}

#[test]
fn s3_structure() {
    let s3 = FiniteGroupTable::s3();
    assert_eq!(s3.order(), 6);
    // Non-abelian witness.
    let noncomm = (0..6).any(|a| (0..6).any(|b| s3.mul(a, b) != s3.mul(b, a)));
    assert!(noncomm);
    // Composition convention: table index ↔ lexicographic permutation,
    // (p·q)(x) = p(q(x)).
    let perms = FiniteGroupTable::permutations(3);
    assert_eq!(perms[0], vec![0, 1, 2]);
    assert_eq!(perms[5], vec![2, 1, 0]);
    for (a, p) in perms.iter().enumerate() {
        for (b, q) in perms.iter().enumerate() {
            let composed: Vec<usize> = (0..3).map(|x| p[q[x]]).collect();
            let idx = perms.iter().position(|r| *r == composed).unwrap();
            assert_eq!(s3.mul(a, b), idx);
        }
    }
    // Lattice: {e}, three ⟨transposition⟩, A₃, S₃.
    let subs = s3.subgroups().unwrap();
    assert_eq!(subs.len(), 6);
    let sizes: Vec<usize> = subs.iter().map(Vec::len).collect();
    assert_eq!(sizes, vec![1, 2, 2, 2, 3, 6]);
}

#[test]
fn d4_and_q8_structure() {
    let d4 = FiniteGroupTable::d4();
    assert_eq!(d4.order(), 8);
    assert_eq!(d4.subgroups().unwrap().len(), 10);
    // s r s = r⁻¹: indices r = 1, s = 4.
    let s_r_s = d4.mul(d4.mul(4, 1), 4);
    assert_eq!(s_r_s, d4.inv(1));

    let q8 = FiniteGroupTable::q8();
    assert_eq!(q8.order(), 8);
    assert_eq!(q8.subgroups().unwrap().len(), 6);
    // i·j = k and j·i = −k (indices: i=2, j=4, k=6, −k=7).
    assert_eq!(q8.mul(2, 4), 6);
    assert_eq!(q8.mul(4, 2), 7);
    // i² = −1.
    assert_eq!(q8.mul(2, 2), 1);
    // Every cyclic subgroup of Q8 except {1} contains −1.
    for g in 1..8 {
        assert!(q8.cyclic_subgroup(g).contains(&1));
    }
}

#[test]
fn direct_product_and_bundled() {
    let z2z2 = FiniteGroupTable::bundled("Z2xZ2").unwrap();
    assert_eq!(z2z2.order(), 4);
    assert_eq!(z2z2.subgroups().unwrap().len(), 5);
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(z2z2.mul(a, b), a ^ b);
        }
    }
    assert_eq!(FiniteGroupTable::bundled("Z5").unwrap().order(), 5);
    assert_eq!(FiniteGroupTable::bundled("S3").unwrap().order(), 6);
    assert_eq!(FiniteGroupTable::bundled("D4").unwrap().order(), 8);
    assert_eq!(FiniteGroupTable::bundled("Q8").unwrap().order(), 8);
    assert!(FiniteGroupTable::bundled("Z99").is_err());
    assert!(FiniteGroupTable::bundled("A5").is_err());
}

#[test]
fn symmetric_four_lattice() {
    let s4 = FiniteGroupTable::symmetric(4).unwrap();
    assert_eq!(s4.order(), 24);
    assert_eq!(s4.subgroups().unwrap().len(), 30);
}

#[test]
fn closure_and_cosets() {
    let s3 = FiniteGroupTable::s3();
    // A transposition and a 3-cycle generate everything.
    let transposition = (1..6).find(|&g| s3.cyclic_subgroup(g).len() == 2).unwrap();
    let three_cycle = (1..6).find(|&g| s3.cyclic_subgroup(g).len() == 3).unwrap();
    assert_eq!(s3.closure(&[transposition, three_cycle]).len(), 6);

    // A₃ has two left cosets with canonical least labels.
    let a3 = s3.cyclic_subgroup(three_cycle);
    let labels = s3.left_coset_labels(&a3);
    let distinct: std::collections::HashSet<u32> = labels.iter().copied().collect();
    assert_eq!(distinct.len(), 2);
    for (u, &lab) in labels.iter().enumerate() {
        assert!(lab as usize <= u);
        assert_eq!(labels[lab as usize], lab);
    }
}

// -------------------------------------------------------------------
// Coset oracles.

#[test]
fn table_oracle_separation() {
    let d4 = FiniteGroupTable::d4();
    let k = d4.cyclic_subgroup(2); // {e, r²}, the center.
    let oracle = TableCosetOracle::new(&d4, k.clone()).unwrap();
    assert_eq!(oracle.label_count(), 4);
    for u in 0..8 {
        for v in 0..8 {
            let same = k.binary_search(&d4.mul(d4.inv(u), v)).is_ok();
            assert_eq!(oracle.label(u) == oracle.label(v), same);
        }
    }
    // from_labels accepts a relabelled copy and rejects corruption.
    let relabel: Vec<u32> = (0..8).map(|u| oracle.label(u) * 7 + 3).collect();
    assert!(TableCosetOracle::from_labels(&d4, relabel.clone(), k.clone()).is_ok());
    let mut bad = relabel;
    bad[3] = 999;
    assert!(TableCosetOracle::from_labels(&d4, bad, k.clone()).is_err());
    // Non-subgroup hidden set.
    assert!(TableCosetOracle::new(&d4, vec![0, 1, 2]).is_err());
}

// -------------------------------------------------------------------
// Product states.

fn dense_kron_power(p: &Array2<Complex64>, m: usize) -> Array2<Complex64> {
    let mut out = Array2::from_elem((1, 1), c(1.0));
    for _ in 0..m {
        let (r1, c1) = (out.nrows(), out.ncols());
        let (r2, c2) = (p.nrows(), p.ncols());
        let mut next = Array2::from_elem((r1 * r2, c1 * c2), c(0.0));
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                for i2 in 0..r2 {
                    for j2 in 0..c2 {
                        next[(i1 * r2 + i2, j1 * c2 + j2)] = out[(i1, j1)] * p[(i2, j2)];
                    }
                }
            }
        }
        out = next;
    }
    out
}

fn random_product_state(m: usize, dim: usize, terms: usize, seed: u64) -> ProductState {
    let mut rng = master_rng(seed);
    let list: Vec<(Complex64, Vec<Vec<Complex64>>)> = (0..terms)
        .map(|_| {
            let coeff = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let factors = (0..m)
                .map(|_| {
                    (0..dim)
                        .map(|_| {
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            (coeff, factors)
        })
        .collect();
    ProductState::new(m, dim, list).unwrap()
}

#[test]
fn gram_inner_matches_dense() {
    for (m, dim, terms) in [(2usize, 3usize, 2usize), (3, 4, 3), (4, 2, 4)] {
        let a = random_product_state(m, dim, terms, 1000 + m as u64);
        let b = random_product_state(m, dim, terms, 2000 + m as u64);
        let da = a.to_dense().unwrap();
        let db = b.to_dense().unwrap();
        let dense_inner: Complex64 = da.iter().zip(&db).map(|(x, y)| x.conj() * y).sum();
        let gram = a.inner(&b).unwrap();
        assert!((gram - dense_inner).norm() < 1e-9, "m={m} dim={dim}");
        assert!(
            (a.norm_sqr() - da.iter().map(|x| x.norm_sqr()).sum::<f64>()).abs() < 1e-9
        );
    }
}

#[test]
fn compact_merges_proportional_terms() {
    // Same product vector written two ways plus a junk-scaled copy.
    let f = vec![c(1.0), c(0.0), c(1.0)];
    let g = vec![c(0.5), c(0.5), c(0.0)];
    let f2: Vec<Complex64> = f.iter().map(|x| x * c(2.0)).collect();
    let g2: Vec<Complex64> = g.iter().map(|x| x * c(0.5)).collect();
    let mut s = ProductState::new(
        2,
        3,
        vec![
            (c(1.0), vec![f.clone(), g.clone()]),
            (c(3.0), vec![f2, g2]),
        ],
    )
    .unwrap();
    let dense_before = s.to_dense().unwrap();
    s.compact().unwrap();
    assert_eq!(s.term_count(), 1);
    let dense_after = s.to_dense().unwrap();
    for (x, y) in dense_before.iter().zip(&dense_after) {
        assert!((x - y).norm() < 1e-10);
    }

    // A cancelling pair vanishes entirely.
    let mut z = ProductState::new(
        1,
        3,
        vec![
            (c(1.0), vec![f.clone()]),
            (c(-1.0), vec![f.clone()]),
        ],
    )
    .unwrap();
    z.compact().unwrap();
    assert_eq!(z.term_count(), 0);
    assert!(z.norm() < 1e-12);
}

#[test]
fn dense_expansion_cap() {
    let s = random_product_state(21, 2, 1, 3);
    assert!(matches!(s.to_dense(), Err(Error::Capability(_))));
}

#[test]
fn coset_state_examples() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    // H = G: every factor uniform.
    let mut rng = master_rng(5);
    let full = coset_state(&z4, &[0, 1, 2, 3], 3, &mut rng).unwrap();
    let dense = full.to_dense().unwrap();
    for x in &dense {
        assert!((x - c(1.0 / 8.0)).norm() < 1e-12);
    }
    // H = {0,2}: factors supported on {a, a+2} with amplitude 1/√2;
    // norm exactly 1.
    let h = vec![0usize, 2];
    for seed in 0..20 {
        let mut rng = master_rng(seed);
        let psi = coset_state(&z4, &h, 2, &mut rng).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let dense = psi.to_dense().unwrap();
        let support: Vec<usize> = dense
            .iter()
            .enumerate()
            .filter(|(_, x)| x.norm() > 1e-12)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(support.len(), 4);
        for (_, x) in dense.iter().enumerate().filter(|(_, x)| x.norm() > 1e-12) {
            assert!((x - c(0.5)).norm() < 1e-12);
        }
        // Each factor index set is a coset: i and i+2 together.
        for idx in &support {
            let (hi, lo) = (idx / 4, idx % 4);
            assert!(support.contains(&(((hi + 2) % 4) * 4 + lo)));
            assert!(support.contains(&(hi * 4 + (lo + 2) % 4)));
        }
    }
    // Non-subgroup rejected.
    assert!(coset_state(&z4, &[0, 1], 2, &mut master_rng(0)).is_err());
}

// -------------------------------------------------------------------
// Projectors.

#[test]
fn projectors_idempotent_hermitian() {
    for table in [
        FiniteGroupTable::cyclic(4).unwrap(),
        FiniteGroupTable::bundled("Z2xZ2").unwrap(),
        FiniteGroupTable::s3(),
        FiniteGroupTable::d4(),
        FiniteGroupTable::q8(),
    ] {
        for sub in table.subgroups().unwrap() {
            let p = SubgroupProjector::new(&table, sub.clone()).unwrap().matrix();
            let n = p.nrows();
            // P† = P.
            for i in 0..n {
                for j in 0..n {
                    assert!((p[(i, j)] - p[(j, i)].conj()).norm() < 1e-12);
                }
            }
            // P² = P.
            for i in 0..n {
                for j in 0..n {
                    let mut acc = c(0.0);
                    for k in 0..n {
                        acc += p[(i, k)] * p[(k, j)];
                    }
                    assert!((acc - p[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn apply_factor_matches_dense_matrix() {
    let d4 = FiniteGroupTable::d4();
    let mut rng = master_rng(99);
    for sub in d4.subgroups().unwrap() {
        let proj = SubgroupProjector::new(&d4, sub).unwrap();
        let p = proj.matrix();
        let v: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fast = proj.apply_factor(&v);
        for i in 0..8 {
            let mut acc = c(0.0);
            for j in 0..8 {
                acc += p[(i, j)] * v[j];
            }
            assert!((acc - fast[i]).norm() < 1e-12);
        }
    }
}

// -------------------------------------------------------------------
// Overlaps.

#[test]
fn trivial_subgroup_projector_is_identity() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    let p = SubgroupProjector::new(&z4, vec![0]).unwrap().matrix();
    assert!(max_abs_uut_minus_identity(&p) < 1e-12);
    let mut rng = master_rng(1);
    let psi = coset_state(&z4, &[0, 2], 4, &mut rng).unwrap();
    let overlap = overlap_pk(&z4, &psi, &[0]).unwrap();
    assert!((overlap - 1.0).abs() < 1e-12);
}

#[test]
fn z4_overlap_sixteenth_with_dense_cross_check() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    let h = vec![0usize, 2];
    let k = vec![0usize, 1, 2, 3];
    let mut rng = master_rng(77);
    let psi = coset_state(&z4, &h, 4, &mut rng).unwrap();
    let overlap = overlap_pk(&z4, &psi, &k).unwrap();
    assert!((overlap - 1.0 / 16.0).abs() < 1e-9);

    // Dense cross-check on 4⁴ = 256 dims.
    let p1 = SubgroupProjector::new(&z4, k).unwrap().matrix();
    let pm = dense_kron_power(&p1, 4);
    let dense = psi.to_dense().unwrap();
    let mut projected = vec![c(0.0); 256];
    for i in 0..256 {
        for j in 0..256 {
            projected[i] += pm[(i, j)] * dense[j];
        }
    }
    let dense_overlap: Complex64 = dense
        .iter()
        .zip(&projected)
        .map(|(x, y)| x.conj() * y)
        .sum();
    assert!((dense_overlap.re - overlap).abs() < 1e-9);
    assert!(dense_overlap.im.abs() < 1e-12);
}

#[test]
fn s3_overlap_exponent_law() {
    let s3 = FiniteGroupTable::s3();
    let three_cycle = (1..6).find(|&g| s3.cyclic_subgroup(g).len() == 3).unwrap();
    let a3 = s3.cyclic_subgroup(three_cycle);
    let transposition = (1..6).find(|&g| s3.cyclic_subgroup(g).len() == 2).unwrap();
    let k = s3.cyclic_subgroup(transposition);

    // m = 3: product form vs dense (216 dims).
    let mut rng = master_rng(303);
    let psi3 = coset_state(&s3, &a3, 3, &mut rng).unwrap();
    let o3 = overlap_pk(&s3, &psi3, &k).unwrap();
    assert!((o3 - 0.125).abs() < 1e-9);
    let p1 = SubgroupProjector::new(&s3, k.clone()).unwrap().matrix();
    let pm = dense_kron_power(&p1, 3);
    let dense = psi3.to_dense().unwrap();
    let mut acc = c(0.0);
    for i in 0..216 {
        for j in 0..216 {
            acc += dense[i].conj() * pm[(i, j)] * dense[j];
        }
    }
    assert!((acc.re - o3).abs() < 1e-9);

    // m = 6 via the product representation; exponent law (1/2)⁶.
    let psi6 = coset_state(&s3, &a3, 6, &mut rng).unwrap();
    let o6 = overlap_pk(&s3, &psi6, &k).unwrap();
    assert!((o6 - (0.5f64).powi(6)).abs() < 1e-9);
    assert!((o6 - o3 * o3).abs() < 1e-9);
}

#[test]
fn overlap_closed_form_across_lattices() {
    // ⟨Ψ|P_K|Ψ⟩ = (|H∩K|/|K|)^m for every (H, K) pair, any coset draw.
    let m = 3;
    for table in [
        FiniteGroupTable::cyclic(4).unwrap(),
        FiniteGroupTable::bundled("Z2xZ2").unwrap(),
        FiniteGroupTable::s3(),
        FiniteGroupTable::d4(),
        FiniteGroupTable::q8(),
    ] {
        let subs = table.subgroups().unwrap();
        for (hi, h) in subs.iter().enumerate() {
            let mut rng = master_rng(hi as u64);
            let psi = coset_state(&table, h, m, &mut rng).unwrap();
            for k in &subs {
                let d = h.iter().filter(|x| k.binary_search(x).is_ok()).count();
                let expect = (d as f64 / k.len() as f64).powi(m as i32);
                let got = overlap_pk(&table, &psi, k).unwrap();
                assert!(
                    (got - expect).abs() < 1e-9,
                    "|G|={} |H|={} |K|={}",
                    table.order(),
                    h.len(),
                    k.len()
                );
                // K ≤ H ⟺ overlap 1.
                let contained = k.iter().all(|x| h.binary_search(x).is_ok());
                assert_eq!(got > 1.0 - 1e-9, contained);
            }
        }
    }
}

#[test]
fn product_vs_dense_overlap_corpus() {
    // |G| ∈ {2,3,4} with m up to 10, |G| = 6 with m up to 7: the
    // product representation agrees with the dense expansion.
    let cases: Vec<(FiniteGroupTable, usize)> = vec![
        (FiniteGroupTable::cyclic(2).unwrap(), 10),
        (FiniteGroupTable::cyclic(3).unwrap(), 10),
        (FiniteGroupTable::cyclic(4).unwrap(), 10),
        (FiniteGroupTable::bundled("Z2xZ2").unwrap(), 10),
        (FiniteGroupTable::s3(), 7),
    ];
    for (table, m_max) in cases {
        let n = table.order();
        let subs = table.subgroups().unwrap();
        for m in [1, m_max / 2, m_max] {
            if (n as u128).pow(m as u32) > 1 << 20 {
                continue;
            }
            for h in &subs {
                let mut rng = master_rng((n * 100 + m) as u64);
                let psi = coset_state(&table, h, m, &mut rng).unwrap();
                for k in &subs {
                    let got = overlap_pk(&table, &psi, k).unwrap();
                    // Dense recomputation.
                    let proj = SubgroupProjector::new(&table, k.clone()).unwrap();
                    let projected = psi.apply_projector(&proj);
                    let dense = psi.to_dense().unwrap();
                    let pd = projected.to_dense().unwrap();
                    let num: f64 = pd.iter().map(|x| x.norm_sqr()).sum();
                    let den: f64 = dense.iter().map(|x| x.norm_sqr()).sum();
                    assert!((got - num / den).abs() < 1e-9);
                }
            }
        }
    }
}

// -------------------------------------------------------------------
// The cascade.

fn run_rate(
    table: &FiniteGroupTable,
    hidden: Vec<usize>,
    m: usize,
    runs: u32,
    seed0: u64,
) -> (f64, EhkOutcome) {
    let oracle = TableCosetOracle::new(table, hidden.clone()).unwrap();
    let mut hits = 0;
    let mut last = None;
    for i in 0..runs {
        let out = ehk_run(table, &oracle, m, seed0 + i as u64).unwrap();
        assert_eq!(out.oracle_calls, m);
        if out.recovered == hidden {
            hits += 1;
        }
        last = Some(out);
    }
    (hits as f64 / runs as f64, last.unwrap())
}

#[test]
fn whole_group_always_recovered() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    let oracle = TableCosetOracle::new(&z4, vec![0, 1, 2, 3]).unwrap();
    for seed in 0..30 {
        let out = ehk_run(&z4, &oracle, 6, seed).unwrap();
        assert_eq!(out.recovered, vec![0, 1, 2, 3]);
        // Every measurement performed must have answered +1.
        assert!(out.outcomes.iter().all(|&(_, plus)| plus));
    }
}

#[test]
fn z4_hidden_two_torsion_rate() {
    // m = 10 = ⌈4·log 4 + 2⌉; success ≥ 1 − 2·4/2⁵ = 0.75 over 400 runs.
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    let (rate, sample) = run_rate(&z4, vec![0, 2], 10, 400, 4040);
    let bound: f64 = 0.75;
    let sigma = (bound * (1.0 - bound) / 400.0).sqrt();
    assert!(rate >= bound - 3.0 * sigma, "rate={rate}");
    assert!(sample.max_terms <= 16);
}

#[test]
fn z2z2_hidden_line_rate() {
    let z2z2 = FiniteGroupTable::bundled("Z2xZ2").unwrap();
    // ⟨(1,0)⟩ = indices {0, 2} in the product ordering.
    let (rate, _) = run_rate(&z2z2, vec![0, 2], 10, 400, 2222);
    let bound: f64 = 0.75;
    let sigma = (bound * (1.0 - bound) / 400.0).sqrt();
    assert!(rate >= bound - 3.0 * sigma, "rate={rate}");
}

#[test]
fn trivial_hidden_subgroup_mostly_clean() {
    // H = {e}: every +1 on K = ⟨g⟩ has probability (1/|K|)^m ≤ 2⁻¹⁰.
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    let (rate, _) = run_rate(&z4, vec![0], 10, 300, 11);
    assert!(rate >= 0.75 - 3.0 * (0.25f64 * 0.75 / 300.0).sqrt(), "rate={rate}");
}

#[test]
fn s3_hidden_a3_rate() {
    let s3 = FiniteGroupTable::s3();
    let three_cycle = (1..6).find(|&g| s3.cyclic_subgroup(g).len() == 3).unwrap();
    let a3 = s3.cyclic_subgroup(three_cycle);
    // m = 12: bound 1 − 12/2⁶ = 0.8125.
    let (rate, _) = run_rate(&s3, a3, 12, 200, 333);
    let bound: f64 = 1.0 - 12.0 / 64.0;
    let sigma = (bound * (1.0 - bound) / 200.0).sqrt();
    assert!(rate >= bound - 3.0 * sigma, "rate={rate}");
}

#[test]
fn q8_hidden_center_rate() {
    let q8 = FiniteGroupTable::q8();
    // Center {1, −1}; m = 14 → bound 1 − 16/2⁷ = 0.875.
    let (rate, _) = run_rate(&q8, vec![0, 1], 14, 200, 888);
    let bound: f64 = 1.0 - 16.0 / 128.0;
    let sigma = (bound * (1.0 - bound) / 200.0).sqrt();
    assert!(rate >= bound - 3.0 * sigma, "rate={rate}");
}

#[test]
fn implied_members_skip_measurements() {
    // In Z₈ with H = G, confirming g = 1 implies everything else.
    let z8 = FiniteGroupTable::cyclic(8).unwrap();
    let oracle = TableCosetOracle::new(&z8, (0..8).collect()).unwrap();
    let out = ehk_run(&z8, &oracle, 6, 0).unwrap();
    assert_eq!(out.outcomes.len(), 1);
    assert_eq!(out.implied.len(), 6);
    assert_eq!(out.recovered.len(), 8);
}

// -------------------------------------------------------------------
// Error accumulation.

#[test]
fn error_cascade_z4() {
    let z4 = FiniteGroupTable::cyclic(4).unwrap();
    for seed in 0..20 {
        let trace = error_accumulation_check(&z4, &[0, 2], 10, seed).unwrap();
        assert_eq!(trace.error_norms[0], 0.0);
        for (i, &e) in trace.error_norms.iter().enumerate() {
            assert!(
                e <= (i * i) as f64 / 1024.0 + 1e-12,
                "seed={seed} i={i} e={e}"
            );
        }
        assert!((trace.fidelity_bound - 0.75).abs() < 1e-12);
        assert!(trace.final_fidelity >= trace.fidelity_bound);
        assert!(trace.final_fidelity <= 1.0 + 1e-12);
    }
}

#[test]
fn error_cascade_across_corpus() {
    let cases: Vec<(FiniteGroupTable, Vec<usize>, usize)> = vec![
        (FiniteGroupTable::cyclic(4).unwrap(), vec![0], 10),
        (FiniteGroupTable::bundled("Z2xZ2").unwrap(), vec![0, 2], 12),
        (FiniteGroupTable::s3(), vec![0], 12),
        (FiniteGroupTable::d4(), FiniteGroupTable::d4().cyclic_subgroup(2), 14),
        (FiniteGroupTable::q8(), vec![0, 1], 14),
    ];
    for (table, h, m) in cases {
        let trace = error_accumulation_check(&table, &h, m, 7).unwrap();
        let scale = 2f64.powi(m as i32);
        for (i, &e) in trace.error_norms.iter().enumerate() {
            assert!(
                e <= (i * i) as f64 / scale + 1e-12,
                "|G|={} i={i} e={e}",
                table.order()
            );
        }
        assert!(
            trace.final_fidelity >= trace.fidelity_bound,
            "|G|={} fidelity={} bound={}",
            table.order(),
            trace.final_fidelity,
            trace.fidelity_bound
        );
    }
}
