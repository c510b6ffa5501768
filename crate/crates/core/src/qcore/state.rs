use super::{qubit_count, Operator, C64};
use crate::{Error, Result};

/// Pure state of `n` qubits, `2^n` amplitudes with unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

const NORM_TOLERANCE: f64 = 1e-12;

impl StateVector {
    /// Validates length `2^n` and `|‖ψ‖² − 1| ≤ 1e-12`.
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::from_raw(n_qubits, amplitudes)?;
        let norm_sq = state.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "state norm² is {norm_sq}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let mut state = Self::from_raw(n_qubits, amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero state".into(),
            ));
        }
        state.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    /// Builds a state from the amplitudes of a length-`2^n` vector without the
    /// norm check (columns of unitaries, evolved states).
    pub fn from_vector(amplitudes: Vec<C64>) -> Result<Self> {
        let n = qubit_count(amplitudes.len()).ok_or(Error::NotPowerOfTwo(amplitudes.len()))?;
        Self::from_raw(n, amplitudes)
    }

    fn from_raw(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!(
                "invalid qubit count {n_qubits}"
            )));
        }
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index,
                max: dim - 1,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::from_raw(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `Uψ`.
pub fn apply(u: &Operator, psi: &StateVector) -> Result<StateVector> {
    if u.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: psi.dim(),
        });
    }
    let out = mat_vec(u, psi.amplitudes());
    Ok(StateVector {
        n_qubits: psi.n_qubits,
        amplitudes: out,
    })
}

pub(crate) fn mat_vec(u: &Operator, v: &[C64]) -> Vec<C64> {
    (0..u.dim())
        .map(|r| u.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `U^t ψ` by `t` successive applications.
pub fn iterate(u: &Operator, psi: &StateVector, t: u32) -> Result<StateVector> {
    if t == 0 {
        return Err(Error::InvalidParameter("iterate requires t >= 1".into()));
    }
    let mut state = apply(u, psi)?;
    for _ in 1..t {
        state.amplitudes = mat_vec(u, &state.amplitudes);
    }
    Ok(state)
}

/// `Tr[ρ_j²]` for the one-qubit reduced state of qubit `j` (1-based, qubit 1
/// is the most significant index bit).
pub fn qubit_purity(psi: &StateVector, j: usize) -> Result<f64> {
    if j == 0 || j > psi.n_qubits {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: psi.n_qubits,
        });
    }
    Ok(purity_of_bit(psi.amplitudes(), psi.n_qubits - j))
}

/// Purity of the qubit at bit position `bit` (0 = least significant),
/// from the 2×2 reduced matrix `[[p0, c], [c*, p1]]`.
pub(crate) fn purity_of_bit(amps: &[C64], bit: usize) -> f64 {
    let mask = 1usize << bit;
    let (mut p0, mut p1) = (0.0, 0.0);
    let mut coherence = C64::new(0.0, 0.0);
    for (idx, a0) in amps.iter().enumerate() {
        if idx & mask != 0 {
            continue;
        }
        let a1 = amps[idx | mask];
        p0 += a0.norm_sqr();
        p1 += a1.norm_sqr();
        coherence += a0 * a1.conj();
    }
    p0 * p0 + p1 * p1 + 2.0 * coherence.norm_sqr()
}
