//! Thin bridge to faer for the O(N³) kernels.

use faer::{Mat, MatRef};

use super::C64;

pub(crate) fn view(entries: &[C64], dim: usize) -> MatRef<'_, C64> {
    MatRef::from_row_major_slice(entries, dim, dim)
}

pub(crate) fn to_row_major(m: MatRef<'_, C64>) -> Vec<C64> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(m[(r, c)]);
        }
    }
    out
}

pub(crate) fn matmul(a: &[C64], b: &[C64], dim: usize) -> Vec<C64> {
    let product: Mat<C64> = view(a, dim) * view(b, dim);
    to_row_major(product.as_ref())
}

/// `max_ij |(A†A − I)_ij|`
pub(crate) fn gram_residual(m: MatRef<'_, C64>) -> f64 {
    let gram: Mat<C64> = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            worst = worst.max((gram[(r, c)] - target).norm());
        }
    }
    worst
}
