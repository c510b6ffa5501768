//! Meyer-Wallach multipartite entanglement `Q = 2 − (2/n) Σ_j Tr[ρ_j²]` and
//! its averages over evolved computational basis states.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::qcore::state::purity_of_bit;
use crate::qcore::{qubit_count, Operator, StateVector, C64};
use crate::stats::EmpiricalDistribution;
use crate::{pairwise_sum, Error, Result};

/// `Q(ψ)` for `n ≥ 2` qubits.
pub fn meyer_wallach_q(psi: &StateVector) -> Result<f64> {
    if psi.n_qubits() < 2 {
        return Err(Error::SingleQubit);
    }
    Ok(q_of_amplitudes(psi.amplitudes(), psi.n_qubits()))
}

pub(crate) fn q_of_amplitudes(amps: &[C64], n: usize) -> f64 {
    let purity: f64 = (0..n).map(|bit| purity_of_bit(amps, bit)).sum();
    // Clamp round-off; purities lie in [1/2, 1] exactly.
    (2.0 - 2.0 * purity / n as f64).clamp(0.0, 1.0)
}

fn qubits_of(u: &Operator) -> Result<usize> {
    let n = qubit_count(u.dim()).ok_or(Error::NotPowerOfTwo(u.dim()))?;
    if n < 2 {
        return Err(Error::SingleQubit);
    }
    Ok(n)
}

/// Evolves all `2^n` basis states together. Row `b` of the state block is
/// `U^t|b⟩`, so the block after `t` steps is `(U^t)ᵀ`.
struct BasisEvolution {
    dim: usize,
    step: Operator,
    states: Operator,
}

impl BasisEvolution {
    fn new(u: &Operator) -> Self {
        let transpose = Operator::from_fn(u.dim(), |r, c| u.get(c, r));
        BasisEvolution {
            dim: u.dim(),
            step: transpose.clone(),
            states: transpose,
        }
    }

    fn advance(&mut self) -> Result<()> {
        self.states = self.states.matmul(&self.step)?;
        Ok(())
    }

    fn q_values(&self, n: usize) -> Vec<f64> {
        self.states
            .entries()
            .par_chunks_exact(self.dim)
            .map(|row| q_of_amplitudes(row, n))
            .collect()
    }
}

/// Per-basis-state `Q(U^t|b⟩)`, `b = 0..2^n`.
pub fn basis_q_values(u: &Operator, t: u32) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let n = qubits_of(u)?;
    let mut evo = BasisEvolution::new(u);
    for _ in 1..t {
        evo.advance()?;
    }
    Ok(evo.q_values(n))
}

/// `⟨Q(t)⟩` over all computational basis states.
pub fn average_q_over_basis(u: &Operator, t: u32) -> Result<f64> {
    let q = basis_q_values(u, t)?;
    Ok(pairwise_sum(&q) / q.len() as f64)
}

/// Pooled `Q` of every (operator, basis state) pair after `t` steps.
pub fn q_distribution(operators: &[Operator], t: u32) -> Result<EmpiricalDistribution> {
    let Some(first) = operators.first() else {
        return Err(Error::EmptySample);
    };
    let dim = first.dim();
    if let Some(bad) = operators.iter().find(|u| u.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let per_op: Vec<Vec<f64>> = operators
        .iter()
        .map(|u| basis_q_values(u, t))
        .collect::<Result<_>>()?;
    EmpiricalDistribution::new(per_op.concat())
}

/// `⟨Q(t)⟩` for `t = 1..=t_max`, optionally with every basis state's `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTimeSeries {
    pub times: Vec<u32>,
    pub mean_q: Vec<f64>,
    /// `per_state[t-1][b]`
    pub per_state: Option<Vec<Vec<f64>>>,
}

impl QTimeSeries {
    /// `t,mean_q[,q_state_0..]`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean_q");
        if let Some(first) = self.per_state.as_ref().and_then(|p| p.first()) {
            for b in 0..first.len() {
                let _ = write!(out, ",q_state_{b}");
            }
        }
        out.push('\n');
        for (k, (t, q)) in self.times.iter().zip(&self.mean_q).enumerate() {
            let _ = write!(out, "{t},{q}");
            if let Some(per) = &self.per_state {
                for v in &per[k] {
                    let _ = write!(out, ",{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Mean of `⟨Q(t)⟩` over `t ∈ [from, to]`.
    pub fn window_mean(&self, from: u32, to: u32) -> Option<f64> {
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.mean_q)
            .filter(|(t, _)| (from..=to).contains(*t))
            .map(|(_, q)| *q)
            .collect();
        (!vals.is_empty()).then(|| pairwise_sum(&vals) / vals.len() as f64)
    }
}

/// Incremental evolution: one application of `U` per step per initial state.
pub fn q_time_series(u: &Operator, t_max: u32, keep_per_state: bool) -> Result<QTimeSeries> {
    if t_max == 0 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    let n = qubits_of(u)?;
    let mut evo = BasisEvolution::new(u);
    let mut series = QTimeSeries {
        times: Vec::with_capacity(t_max as usize),
        mean_q: Vec::with_capacity(t_max as usize),
        per_state: keep_per_state.then(Vec::new),
    };
    for t in 1..=t_max {
        if t > 1 {
            evo.advance()?;
        }
        let q = evo.q_values(n);
        series.times.push(t);
        series.mean_q.push(pairwise_sum(&q) / q.len() as f64);
        if let Some(per) = series.per_state.as_mut() {
            per.push(q);
        }
    }
    Ok(series)
}
