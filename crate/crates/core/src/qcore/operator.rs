use std::f64::consts::PI;

use super::linalg;
use super::{unitarity_tolerance, C64};
use crate::{Error, Result};

/// Dense `N×N` complex matrix stored row-major, `U[row][col]`.
///
/// The `unitary` flag records that the constructor guarantees unitarity (or
/// that [`Operator::verify_unitary`] has checked it). Products of flagged
/// operators stay flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
    unitary: bool,
}

impl Operator {
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "operator dimension must be >= 1".into(),
            ));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Operator {
            dim,
            entries,
            unitary: false,
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "operator dimension must be >= 1");
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Operator {
            dim,
            entries,
            unitary: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |r, c| {
            if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .assume_unitary()
    }

    /// Diagonal operator. Flagged unitary when every entry has unit modulus.
    pub fn diagonal(diag: &[C64]) -> Self {
        let op = Self::from_fn(diag.len(), |r, c| {
            if r == c {
                diag[r]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        if diag.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-14) {
            op.assume_unitary()
        } else {
            op
        }
    }

    /// Diagonal operator with entries `e^{iθ_k}`.
    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let diag: Vec<C64> = phases.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        Self::from_fn(diag.len(), |r, c| {
            if r == c {
                diag[r]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .assume_unitary()
    }

    /// Flags the operator as unitary without checking. Constructors that are
    /// unitary by construction use this.
    pub(crate) fn assume_unitary(mut self) -> Self {
        debug_assert!(
            self.dim > 64 || self.unitarity_residual() <= unitarity_tolerance(self.dim),
            "assume_unitary on a non-unitary operator"
        );
        self.unitary = true;
        self
    }

    /// Checks `max |U†U − I| ≤ 1e-10·N` and flags the operator.
    pub fn verify_unitary(mut self) -> Result<Self> {
        let residual = self.unitarity_residual();
        let tolerance = unitarity_tolerance(self.dim);
        if residual > tolerance {
            return Err(Error::NotUnitary {
                residual,
                tolerance,
            });
        }
        self.unitary = true;
        Ok(self)
    }

    pub fn is_flagged_unitary(&self) -> bool {
        self.unitary
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[C64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    /// `max_ij |(U†U − I)_ij|`
    pub fn unitarity_residual(&self) -> f64 {
        linalg::gram_residual(linalg::view(&self.entries, self.dim))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::from_fn(self.dim, |r, c| self.get(c, r).conj());
        out.unitary = self.unitary;
        out
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Operator) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        Ok(Operator {
            dim: self.dim,
            entries: linalg::matmul(&self.entries, &rhs.entries, self.dim),
            unitary: self.unitary && rhs.unitary,
        })
    }

    /// Kronecker product `self ⊗ rhs`; `self` acts on the more significant
    /// index bits.
    pub fn kron(&self, rhs: &Operator) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let mut out = Self::from_fn(a * b, |r, c| self.get(r / b, c / b) * rhs.get(r % b, c % b));
        out.unitary = self.unitary && rhs.unitary;
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
            unitary: self.unitary && (factor.norm() - 1.0).abs() <= 1e-14,
        }
    }

    /// `max_ij |A_ij − B_ij|`; infinite on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `U^t` by binary exponentiation.
pub fn matrix_power(u: &Operator, t: u32) -> Result<Operator> {
    if t == 0 {
        return Err(Error::InvalidParameter(
            "matrix_power requires t >= 1".into(),
        ));
    }
    let mut result: Option<Operator> = None;
    let mut base = u.clone();
    let mut e = t;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(acc) => acc.matmul(&base)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.matmul(&base)?;
    }
    Ok(result.expect("t >= 1 sets at least one bit"))
}

/// Unitary DFT `F[k][j] = N^{-1/2} e^{−2πi(k+s)(j+s)/N}` with `s = 1/2` when
/// `half_shift` is set.
pub fn dft(n: usize, half_shift: bool) -> Operator {
    let s = if half_shift { 0.5 } else { 0.0 };
    let norm = 1.0 / (n as f64).sqrt();
    let nf = n as f64;
    if half_shift {
        Operator::from_fn(n, |k, j| {
            // (k+s)(j+s) is not an integer, so reduce in floating point.
            let arg = -2.0 * PI * ((k as f64 + s) * (j as f64 + s) / nf).rem_euclid(2.0);
            C64::from_polar(norm, arg)
        })
    } else {
        // Reduce kj mod N exactly before taking the angle.
        Operator::from_fn(n, |k, j| {
            let m = ((k as u128 * j as u128) % n as u128) as f64;
            C64::from_polar(norm, -2.0 * PI * m / nf)
        })
    }
    .assume_unitary()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dft_small_cases() {
        let f1 = dft(1, false);
        assert_eq!(f1.entries(), &[c(1.0, 0.0)]);

        let f2 = dft(2, false);
        let h = Operator::from_entries(
            2,
            vec![
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(-FRAC_1_SQRT_2, 0.0),
            ],
        )
        .unwrap();
        assert!(f2.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn dft_is_unitary() {
        for n in [2, 4, 8, 256] {
            for shift in [false, true] {
                let r = dft(n, shift).unitarity_residual();
                assert!(r < 1e-12, "n={n} shift={shift} residual={r:e}");
            }
        }
        assert!(dft(4, true).unitarity_residual() < 1e-14);
    }

    #[test]
    fn matrix_power_of_diagonal() {
        let phases = [0.3, 1.1, -2.0, 2.9];
        let d = Operator::diagonal_phases(&phases);
        let t = 7;
        let expected = Operator::diagonal_phases(&phases.map(|p| p * t as f64));
        assert!(matrix_power(&d, t).unwrap().max_abs_diff(&expected) < 1e-13);
        assert_eq!(matrix_power(&d, 1).unwrap(), d);
        assert!(matrix_power(&d, 0).is_err());
    }

    #[test]
    fn kron_orders_first_factor_as_most_significant() {
        let x =
            Operator::from_entries(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let id = Operator::identity(2);
        let x1 = x.kron(&id);
        // X on qubit 1 maps |00> (index 0) to |10> (index 2).
        assert_eq!(x1.get(2, 0), c(1.0, 0.0));
        assert_eq!(x1.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Operator::from_entries(0, vec![]).is_err());
        assert!(matches!(
            Operator::from_entries(2, vec![c(1., 0.); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn verify_unitary_rejects_non_unitary() {
        let m =
            Operator::from_entries(2, vec![c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        assert!(matches!(m.verify_unitary(), Err(Error::NotUnitary { .. })));
    }
}
