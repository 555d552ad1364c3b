#![allow(dead_code)]

use hsp_core::statevec::StateVector;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

pub fn random_unit_vec(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

pub fn random_state(dim: usize, seed: u64) -> StateVector {
    let mut rng = hsp_core::rng::master_rng(seed);
    StateVector::from_amplitudes(random_unit_vec(dim, &mut rng)).unwrap()
}

/// Haar-ish random unitary via Gram-Schmidt on a random complex matrix.
pub fn random_unitary(d: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = hsp_core::rng::master_rng(seed);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut m = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            m[(r, c)] = *x;
        }
    }
    m
}

pub fn vec_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_entry_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Unit vector at exact Euclidean distance `eps` from unit `a`
/// (rotation toward a random orthogonal direction).
pub fn unit_at_distance(a: &[Complex64], eps: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let dim = a.len();
    loop {
        let mut d = random_unit_vec(dim, rng);
        let proj: Complex64 = a.iter().zip(&d).map(|(x, y)| x.conj() * y).sum();
        for (y, x) in d.iter_mut().zip(a) {
            *y -= proj * x;
        }
        let norm = d.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        // chord ‖a−b‖ = 2 sin(φ/2) for b = cos φ·a + sin φ·d̂
        let phi = 2.0 * (eps / 2.0).asin();
        let (s, c) = (phi.sin(), phi.cos());
        return a
            .iter()
            .zip(&d)
            .map(|(x, y)| x * c + y * (s / norm))
            .collect();
    }
}
