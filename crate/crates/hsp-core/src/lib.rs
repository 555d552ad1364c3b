//! Simulation toolkit for the hidden subgroup problem (HSP) over finite
//! groups, together with the Fourier-transform machinery the quantum
//! algorithms rest on.
//!
//! The crate is organized bottom-up:
//!
//! * [`statevec`]: dense complex state vectors, gates, measurement.
//! * [`qft`]: Fourier transforms: dense reference matrices, the exact
//!   power-of-two circuit, Coppersmith's approximate circuit, coprime
//!   composition, and the approximate odd-modulus transform with its
//!   error diagnostics.
//! * [`abelian`]: finite abelian groups as modulus tuples: characters,
//!   orthogonal subgroups, the quantum sampling loop, and classical
//!   reconstruction via Smith normal form.
//! * [`problems`]: Simon's problem, the cyclic-group HSP with GCD
//!   post-processing, and factoring via order finding.
//! * [`ehk`]: the Ettinger–Høyer–Knill distinguishing procedure on
//!   small explicit groups (Cayley tables, coset-state tensor products,
//!   subgroup projectors).
//! * [`graphs`]: graph-isomorphism reductions driven by a pluggable
//!   ISO oracle, the vertex-labelling gadget, and the permutation
//!   coset oracle for the symmetric-group HSP.
//! * [`bounds`]: Monte-Carlo and sieve checkers for the probability
//!   lemmas the algorithms' success rates rest on.
//!
//! Everything is deterministic given a seed: stochastic entry points
//! take a master seed and derive per-trial generators through
//! [`rng::trial_rng`], so enlarging a trial count never reshuffles
//! earlier trials.

pub mod abelian;
pub mod bounds;
pub mod ehk;
pub mod graphs;
pub mod problems;
pub mod qft;
pub mod rng;
pub mod statevec;

/// Numeric tolerances used across the crate.
///
/// Desk-scale dimensions (at most a few million amplitudes) keep
/// double-precision rounding errors orders of magnitude below these.
pub mod tol {
    /// Norm preservation and amplitude-level agreement.
    pub const NORM: f64 = 1e-9;
    /// Matrix identity checks (unitarity residuals, commutation laws).
    pub const MATRIX: f64 = 1e-10;
    /// Entrywise unitarity of explicitly constructed small matrices.
    pub const UNITARY: f64 = 1e-12;
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid qubit targets: {0}")]
    BadTargets(String),
    #[error("state of dimension {0} is not qubit-addressed")]
    NotQubitAddressed(usize),
    #[error("operator is not unitary: {0}")]
    NotUnitary(String),
    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),
    #[error("{0}")]
    Domain(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
