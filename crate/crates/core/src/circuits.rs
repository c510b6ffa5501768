//! Pseudo-random operators: `m` rounds of independent Haar SU(2) rotations on
//! every qubit followed by nearest-neighbour `σz⊗σz` coupling, then one
//! closing rotation layer.

use std::f64::consts::FRAC_PI_4;

use crate::ensembles::{parse_field, su2_haar_block, Generator, RngStream};
use crate::qcore::{Operator, C64};
use crate::{Error, Result};

type Gate = [[C64; 2]; 2];

/// Diagonal `exp(i(π/4) Σ_{j=1}^{n-1} σz^j σz^{j+1})` on an open chain.
pub fn nn_coupling(n: usize) -> Result<Operator> {
    Ok(Operator::diagonal(&coupling_phases(n)?))
}

fn coupling_phases(n: usize) -> Result<Vec<C64>> {
    if n < 2 {
        return Err(Error::TooFewQubits(n));
    }
    Ok((0..1usize << n)
        .map(|b| {
            // z_j = +1 for bit 0, -1 for bit 1; qubit 1 is the MSB.
            let z = |j: usize| if (b >> (n - j)) & 1 == 0 { 1 } else { -1 };
            let sum: i32 = (1..n).map(|j| z(j) * z(j + 1)).sum();
            C64::from_polar(1.0, FRAC_PI_4 * f64::from(sum))
        })
        .collect())
}

/// One independent Haar SU(2) rotation per qubit; `gates[j-1]` acts on
/// qubit `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationLayer {
    gates: Vec<Gate>,
}

impl RotationLayer {
    /// Draws qubits `1..=n` in order.
    pub fn draw(n: usize, gen: &mut Generator) -> Self {
        RotationLayer {
            gates: (0..n).map(|_| su2_haar_block(gen)).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.gates.len()
    }

    pub fn gate(&self, qubit: usize) -> Operator {
        let g = &self.gates[qubit - 1];
        Operator::from_entries(2, vec![g[0][0], g[0][1], g[1][0], g[1][1]])
            .expect("2x2")
            .verify_unitary()
            .expect("SU(2) gate")
    }

    /// Dense `R_1 ⊗ … ⊗ R_n`.
    pub fn to_operator(&self) -> Operator {
        let mut m = Operator::identity(1 << self.n_qubits());
        self.apply_left(&mut m);
        m
    }

    /// `M ← (R_1 ⊗ … ⊗ R_n) · M`, one qubit at a time.
    pub fn apply_left(&self, m: &mut Operator) {
        let n = self.n_qubits();
        assert_eq!(m.dim(), 1 << n, "layer and operator sizes disagree");
        for (j, gate) in self.gates.iter().enumerate() {
            apply_gate_left(m, n - 1 - j, gate);
        }
    }
}

/// Left-multiplies by `gate` acting on index bit `bit` (0 = LSB).
fn apply_gate_left(m: &mut Operator, bit: usize, g: &Gate) {
    let dim = m.dim();
    let mask = 1usize << bit;
    let entries = m.entries_mut();
    for lo in (0..dim).filter(|r| r & mask == 0) {
        let hi = lo | mask;
        // lo < hi, so split to borrow both rows.
        let (head, tail) = entries.split_at_mut(hi * dim);
        let row_lo = &mut head[lo * dim..(lo + 1) * dim];
        let row_hi = &mut tail[..dim];
        for (a, b) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = g[0][0] * x + g[0][1] * y;
            *b = g[1][0] * x + g[1][1] * y;
        }
    }
}

fn apply_diagonal_left(m: &mut Operator, diag: &[C64]) {
    let dim = m.dim();
    for (row, d) in m.entries_mut().chunks_exact_mut(dim).zip(diag) {
        row.iter_mut().for_each(|z| *z *= d);
    }
}

/// Dense tensor product of independent Haar SU(2) draws.
pub fn rotation_layer(n: usize, gen: &mut Generator) -> Operator {
    RotationLayer::draw(n, gen).to_operator()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoRandomSpec {
    pub n_qubits: usize,
    pub iterations: usize,
    pub rng: RngStream,
}

impl PseudoRandomSpec {
    /// Parses `"pseudo:n:m"`.
    pub fn parse(spec: &str, rng: RngStream) -> Result<Self> {
        let mut parts = spec.split(':');
        if parts.next() != Some("pseudo") {
            return Err(Error::InvalidParameter(format!(
                "not a pseudo-random spec: {spec}"
            )));
        }
        let n_qubits: usize = parse_field(spec, parts.next(), "qubit count")?;
        let iterations: usize = parse_field(spec, parts.next(), "iteration count")?;
        if parts.next().is_some() {
            return Err(Error::InvalidParameter(format!("{spec}: trailing fields")));
        }
        if n_qubits < 2 {
            return Err(Error::TooFewQubits(n_qubits));
        }
        Ok(PseudoRandomSpec {
            n_qubits,
            iterations,
            rng,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// `R_final · Π_{k=1..m} (U_nnc · R_k)` with `R_1` applied first.
/// Every layer is a fresh draw from `spec.rng`, in application order.
pub fn pseudo_random_operator(spec: &PseudoRandomSpec) -> Result<Operator> {
    let n = spec.n_qubits;
    let coupling = coupling_phases(n)?;
    let mut gen = spec.rng.generator();
    let mut m = Operator::identity(1 << n);
    for _ in 0..spec.iterations {
        RotationLayer::draw(n, &mut gen).apply_left(&mut m);
        apply_diagonal_left(&mut m, &coupling);
    }
    RotationLayer::draw(n, &mut gen).apply_left(&mut m);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn gen(id: u64) -> Generator {
        RngStream::new(5, id).generator()
    }

    #[test]
    fn coupling_phases_by_hand() {
        let u = nn_coupling(2).unwrap();
        assert!((u.get(0, 0) - C64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert!((u.get(1, 1) - C64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-15);
        let u3 = nn_coupling(3).unwrap();
        assert!((u3.get(0b010, 0b010) - C64::from_polar(1.0, -FRAC_PI_2)).norm() < 1e-15);
        assert!((u3.get(0b000, 0b000) - C64::from_polar(1.0, FRAC_PI_2)).norm() < 1e-15);
        assert!(matches!(nn_coupling(1), Err(Error::TooFewQubits(1))));
    }

    #[test]
    fn coupling_is_open_chain() {
        // |100> has z = (-1, +1, +1): z1z2 + z2z3 = 0. A ring would add z3z1 = -1.
        let u = nn_coupling(3).unwrap();
        assert!((u.get(0b100, 0b100) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn layer_matches_kronecker_oracle() {
        let layer = RotationLayer::draw(2, &mut gen(1));
        let expected = layer.gate(1).kron(&layer.gate(2));
        assert!(layer.to_operator().max_abs_diff(&expected) < 1e-15);

        let one = rotation_layer(1, &mut gen(2));
        let direct = crate::ensembles::su2_haar(&mut gen(2));
        assert_eq!(one, direct);

        let layer = RotationLayer::draw(4, &mut gen(3));
        let expected = layer
            .gate(1)
            .kron(&layer.gate(2))
            .kron(&layer.gate(3))
            .kron(&layer.gate(4));
        assert!(layer.to_operator().max_abs_diff(&expected) < 1e-14);
        assert!(layer.to_operator().unitarity_residual() < 1e-10 * 16.0);
    }

    #[test]
    fn pseudo_random_matches_dense_layer_products() {
        let spec = PseudoRandomSpec {
            n_qubits: 3,
            iterations: 2,
            rng: RngStream::new(1, 2),
        };
        let mut g = spec.rng.generator();
        let coupling = nn_coupling(3).unwrap();
        let r1 = RotationLayer::draw(3, &mut g).to_operator();
        let r2 = RotationLayer::draw(3, &mut g).to_operator();
        let rf = RotationLayer::draw(3, &mut g).to_operator();
        let expected = rf
            .matmul(&coupling)
            .unwrap()
            .matmul(&r2)
            .unwrap()
            .matmul(&coupling)
            .unwrap()
            .matmul(&r1)
            .unwrap();
        let got = pseudo_random_operator(&spec).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn zero_iterations_is_one_rotation_layer() {
        let spec = PseudoRandomSpec {
            n_qubits: 2,
            iterations: 0,
            rng: RngStream::new(3, 4),
        };
        let expected = rotation_layer(2, &mut spec.rng.generator());
        assert_eq!(pseudo_random_operator(&spec).unwrap(), expected);
    }

    #[test]
    fn parse_spec_strings() {
        let rng = RngStream::new(0, 0);
        let s = PseudoRandomSpec::parse("pseudo:8:16", rng).unwrap();
        assert_eq!((s.n_qubits, s.iterations, s.dim()), (8, 16, 256));
        for bad in [
            "pseudo:1:2",
            "pseudo:8",
            "cue:8:2",
            "pseudo:8:2:1",
            "pseudo:x:2",
        ] {
            assert!(PseudoRandomSpec::parse(bad, rng).is_err(), "{bad}");
        }
    }
}
