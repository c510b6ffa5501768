//! Complex linear-algebra substrate.
//!
//! Qubit 1 is the most significant bit of a basis-state index: for `n`
//! qubits, qubit `j` (1-based) is bit `n - j` counting from the least
//! significant end. Kronecker products follow the same order, so
//! `A ⊗ B` puts `A` on qubit 1.

mod io;
mod linalg;
mod operator;
mod spectral;
pub(crate) mod state;

pub use io::{OperatorJson, StateVectorJson, OPERATOR_MAGIC};
pub use operator::{dft, matrix_power, Operator};
pub use spectral::{hermitian_eigen, spectral_decomposition, SpectralData};
pub use state::{apply, iterate, qubit_purity, StateVector};

pub type C64 = num_complex::Complex64;

/// Unitarity tolerance for a flagged-unitary operator of dimension `dim`.
pub fn unitarity_tolerance(dim: usize) -> f64 {
    1e-10 * dim as f64
}

/// `log2(dim)` when `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}
