//! Numerical laboratory for matrix-element randomness and entanglement
//! production of random, interpolating, pseudo-random and quantized chaotic
//! unitary operators.
//!
//! The crate is organized bottom-up:
//!
//! - [`qcore`]: dense complex operators, state vectors, spectral decomposition,
//!   discrete Fourier transforms and single-qubit purities.
//! - [`ensembles`]: seedable samplers for GUE, CUE, CPE, the δ-interpolating
//!   ensembles and Haar SU(2) rotations.
//! - [`circuits`]: the pseudo-random rotate-then-couple operator.
//! - [`chaosmaps`]: quantized sawtooth, Harper and baker's maps.
//! - [`stats`]: empirical distributions, KS distances and δ-fitting.
//! - [`entangle`]: Meyer-Wallach Q and its basis-state averages.

pub mod chaosmaps;
pub mod circuits;
pub mod ensembles;
pub mod entangle;
mod error;
pub mod qcore;
pub mod stats;
mod sum;

pub use error::{Error, Result};
pub use qcore::{Operator, SpectralData, StateVector, C64};
pub use sum::pairwise_sum;
