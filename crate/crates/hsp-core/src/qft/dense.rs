//! Dense reference transform: F_N[j,k] = ω_N^{jk}/√N for any modulus.
//! Every circuit construction in this crate is tested against it.

use ndarray::Array2;
use num_complex::Complex64;

use crate::statevec::{root_of_unity, StateVector, C_ZERO};
use crate::{Error, Result};

/// Largest modulus the dense representation will materialize (the
/// matrix is O(N²) complex entries).
pub const DENSE_DIM_CAP: usize = 2048;

#[derive(Debug, Clone)]
pub struct CyclicQftMatrix {
    n: usize,
    matrix: Array2<Complex64>,
}

/// Builds F_N.
pub fn dense_qft(n: usize) -> Result<CyclicQftMatrix> {
    if n == 0 {
        return Err(Error::domain("modulus must be positive"));
    }
    if n > DENSE_DIM_CAP {
        return Err(Error::capability(format!(
            "dense transform capped at modulus {DENSE_DIM_CAP}, got {n}"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut matrix = Array2::from_elem((n, n), C_ZERO);
    for j in 0..n {
        for k in 0..n {
            // jk mod N keeps the phase argument small and exact.
            let e = ((j as u64) * (k as u64) % n as u64) as i64;
            matrix[(j, k)] = root_of_unity(e, n as u64) * scale;
        }
    }
    Ok(CyclicQftMatrix { n, matrix })
}

impl CyclicQftMatrix {
    pub(crate) fn from_matrix(n: usize, matrix: Array2<Complex64>) -> Self {
        CyclicQftMatrix { n, matrix }
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.n).map(|j| self.matrix[(j, k)]).collect()
    }

    /// F_N |v⟩.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.n {
            return Err(Error::DimMismatch(v.dim(), self.n));
        }
        let amps = self.apply_to_vec(v.amplitudes());
        StateVector::from_amplitudes(amps)
    }

    /// F_N† |v⟩.
    pub fn apply_inverse(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.n {
            return Err(Error::DimMismatch(v.dim(), self.n));
        }
        let mut amps = vec![C_ZERO; self.n];
        for (r, out) in amps.iter_mut().enumerate() {
            let mut acc = C_ZERO;
            for c in 0..self.n {
                acc += self.matrix[(c, r)].conj() * v.amplitudes()[c];
            }
            *out = acc;
        }
        StateVector::from_amplitudes(amps)
    }

    /// Matrix-vector product on a raw (not necessarily unit) vector.
    pub fn apply_to_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![C_ZERO; self.n];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C_ZERO;
            for (c, x) in v.iter().enumerate() {
                acc += self.matrix[(r, c)] * x;
            }
            *o = acc;
        }
        out
    }

    /// ‖FF† − I‖_max.
    pub fn unitarity_residual(&self) -> f64 {
        crate::statevec::max_abs_uut_minus_identity(&self.matrix)
    }
}
