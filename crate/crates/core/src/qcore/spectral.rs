use std::f64::consts::TAU;

use faer::Mat;

use super::linalg;
use super::{Operator, C64};
use crate::{Error, Result};

/// Eigenphases and eigenvectors of a unitary operator.
///
/// `phases` are sorted ascending in `[0, 2π)`; column `l` of `vectors` is the
/// eigenvector for `phases[l]`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub phases: Vec<f64>,
    pub vectors: Operator,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// `V · diag(e^{iθ}) · V†`
    pub fn reconstruct(&self) -> Operator {
        let n = self.dim();
        let v = &self.vectors;
        let scaled =
            Operator::from_fn(n, |r, c| v.get(r, c) * C64::from_polar(1.0, self.phases[c]));
        scaled
            .matmul(&v.adjoint())
            .expect("same dimension by construction")
    }

    /// `max |V†V − I|`
    pub fn orthonormality_residual(&self) -> f64 {
        self.vectors.unitarity_residual()
    }
}

/// Loosest unitarity residual accepted by the eigensolver.
fn input_tolerance(dim: usize) -> f64 {
    1e-8 * dim as f64
}

/// Eigenvectors returned by the general eigensolver are re-orthonormalized
/// when their Gram residual exceeds this (near-degenerate clusters).
const ORTHONORMALITY_TARGET: f64 = 1e-11;

/// Eigendecomposition of a unitary operator.
///
/// The general complex eigensolver is used; for a normal matrix its
/// eigenvectors are orthogonal up to round-off except inside clusters of
/// nearly equal eigenvalues, which are cleaned up by two passes of modified
/// Gram-Schmidt in phase order.
pub fn spectral_decomposition(u: &Operator) -> Result<SpectralData> {
    let n = u.dim();
    let residual = u.unitarity_residual();
    let tolerance = input_tolerance(n);
    if residual > tolerance {
        return Err(Error::NotUnitary {
            residual,
            tolerance,
        });
    }

    let evd = linalg::view(u.entries(), n)
        .eigen()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vecs = evd.U();

    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let z = values[k];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::ConvergenceFailure("non-finite eigenvalue".into()));
            }
            Ok((wrap_phase(z.im.atan2(z.re)), k))
        })
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut columns: Mat<C64> = Mat::from_fn(n, n, |r, c| vecs[(r, order[c].1)]);
    for c in 0..n {
        let norm = columns.col(c).norm_l2();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ConvergenceFailure("degenerate eigenvector".into()));
        }
        for r in 0..n {
            columns[(r, c)] /= norm;
        }
    }
    if linalg::gram_residual(columns.as_ref()) > ORTHONORMALITY_TARGET {
        modified_gram_schmidt(&mut columns);
        modified_gram_schmidt(&mut columns);
    }

    let vectors =
        Operator::from_entries(n, linalg::to_row_major(columns.as_ref()))?.assume_unitary();
    Ok(SpectralData {
        phases: order.into_iter().map(|(p, _)| p).collect(),
        vectors,
    })
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
pub fn hermitian_eigen(h: &Operator) -> Result<(Vec<f64>, Operator)> {
    let n = h.dim();
    let evd = linalg::view(h.entries(), n)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|k| values[k].re).collect();
    let vectors = Operator::from_entries(n, linalg::to_row_major(evd.U()))?;
    Ok((values, vectors))
}

fn wrap_phase(angle: f64) -> f64 {
    let p = angle.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

fn modified_gram_schmidt(m: &mut Mat<C64>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    for c in 0..cols {
        for prev in 0..c {
            let mut overlap = C64::new(0.0, 0.0);
            for r in 0..rows {
                overlap += m[(r, prev)].conj() * m[(r, c)];
            }
            for r in 0..rows {
                let v = m[(r, prev)];
                m[(r, c)] -= overlap * v;
            }
        }
        let norm = m.col(c).norm_l2();
        for r in 0..rows {
            m[(r, c)] /= norm;
        }
    }
}
