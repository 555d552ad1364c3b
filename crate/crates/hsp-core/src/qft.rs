//! Fourier transforms over cyclic groups, in four guises: the dense
//! reference matrix F_N, the exact power-of-two circuit, the truncated
//! (approximate) circuit, and compositions for non-power-of-two moduli
//! (coprime factor splitting, and the approximate odd-modulus transform
//! with rigorous error accounting).

pub mod circuit;
pub mod dense;
pub mod odd;

pub use circuit::{afft_circuit, coprime_qft, exact_qft_circuit, ApproxQftParams, QftCircuit};
pub use dense::{dense_qft, CyclicQftMatrix, DENSE_DIM_CAP};
pub use odd::{
    delta_map_build, odd_qft_diagnostics, plan_odd_qft, run_odd_qft, run_odd_qft_with,
    analyze_odd_qft, DeltaMap, FmKind, OddQftDiagnostics, OddQftPlan, OddQftReport, OddQftRun,
};
