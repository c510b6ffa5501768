//! Quantized maps as dense unitaries: sawtooth, Harper and the baker's map.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::ensembles::parse_field;
use crate::qcore::{dft, unitarity_tolerance, Operator, C64};
use crate::{Error, Result};

/// Sawtooth map `U[n][m] = (e^{−iπ/4}/√N) e^{ikπm²/N} e^{iπ(n−m)²/N}` with
/// `n, m ∈ 0..N`.
pub fn sawtooth(dim: usize, k: f64) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "sawtooth needs N >= 2, got {dim}"
        )));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    let modulus = 2 * dim as u64;
    let kick: Vec<f64> = (0..dim as u64)
        .map(|m| PI * (k * (m * m) as f64 / dim as f64).rem_euclid(2.0))
        .collect();
    let u = Operator::from_fn(dim, |n, m| {
        let d = n.abs_diff(m) as u64;
        // e^{iπd²/N} only depends on d² mod 2N.
        let free = PI * ((d * d) % modulus) as f64 / dim as f64;
        C64::from_polar(norm, kick[m] + free - FRAC_PI_4)
    });
    let residual = u.unitarity_residual();
    let tolerance = 1e-9f64.min(unitarity_tolerance(dim));
    if residual > tolerance {
        return Err(Error::NotUnitary {
            residual,
            tolerance,
        });
    }
    Ok(u.assume_unitary())
}

fn harper_phases(dim: usize, gamma: f64) -> Vec<C64> {
    let n = dim as f64;
    (0..dim)
        .map(|j| C64::from_polar(1.0, n * gamma * (TAU * j as f64 / n).cos()))
        .collect()
}

/// Harper map `D_q F† D_p F` on the integer grid, with
/// `D = diag(e^{iNγ cos(2πj/N)})` and `F = dft(N, false)`.
pub fn harper(dim: usize, gamma: f64) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "Harper needs N >= 2, got {dim}"
        )));
    }
    let f = dft(dim, false);
    let d = harper_phases(dim, gamma);
    let dp_f = Operator::from_fn(dim, |r, c| d[r] * f.get(r, c)).verify_unitary()?;
    let mut u = f.adjoint().matmul(&dp_f)?;
    let entries: Vec<C64> = u
        .entries()
        .chunks_exact(dim)
        .zip(&d)
        .flat_map(|(row, dq)| row.iter().map(move |z| z * dq))
        .collect();
    u = Operator::from_entries(dim, entries)?;
    u.verify_unitary()
}

/// Baker's map `G_N† · (G_{N/2} ⊕ G_{N/2})` with periodic transforms
/// `G_M = dft(M, false)`.
pub fn baker(dim: usize) -> Result<Operator> {
    baker_with(dim, false)
}

/// `B = G_N† · blockdiag(G_{N/2}, G_{N/2})` with `G_M = dft(M, half_shift)`.
/// The periodic form (`half_shift = false`) is the default; the
/// antiperiodic form is kept for comparison.
pub fn baker_with(dim: usize, half_shift: bool) -> Result<Operator> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::OddDimension(dim));
    }
    let half = dim / 2;
    let g_half = dft(half, half_shift);
    let block = Operator::from_fn(dim, |r, c| {
        if (r < half) == (c < half) {
            g_half.get(r % half, c % half)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .verify_unitary()?;
    dft(dim, half_shift)
        .adjoint()
        .matmul(&block)?
        .verify_unitary()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Sawtooth,
    Harper,
    Baker,
}

/// Which quantized map to build; `parameter` is `k` for sawtooth, `γ` for
/// Harper and ignored for baker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub dim: usize,
    pub parameter: f64,
}

impl MapSpec {
    pub fn sawtooth(dim: usize, k: f64) -> Self {
        MapSpec {
            kind: MapKind::Sawtooth,
            dim,
            parameter: k,
        }
    }

    pub fn harper(dim: usize, gamma: f64) -> Self {
        MapSpec {
            kind: MapKind::Harper,
            dim,
            parameter: gamma,
        }
    }

    pub fn baker(dim: usize) -> Self {
        MapSpec {
            kind: MapKind::Baker,
            dim,
            parameter: 0.0,
        }
    }

    pub fn build(&self) -> Result<Operator> {
        match self.kind {
            MapKind::Sawtooth => sawtooth(self.dim, self.parameter),
            MapKind::Harper => harper(self.dim, self.parameter),
            MapKind::Baker => baker(self.dim),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MapKind::Sawtooth => write!(f, "sawtooth:{}:{}", self.dim, self.parameter),
            MapKind::Harper => write!(f, "harper:{}:{}", self.dim, self.parameter),
            MapKind::Baker => write!(f, "baker:{}", self.dim),
        }
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    /// `"sawtooth:N:k"`, `"harper:N:gamma"` or `"baker:N"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let dim: usize = parse_field(s, parts.next(), "dimension")?;
        let spec = match kind {
            "sawtooth" => MapSpec::sawtooth(dim, parse_field(s, parts.next(), "k")?),
            "harper" => MapSpec::harper(dim, parse_field(s, parts.next(), "gamma")?),
            "baker" => {
                if !dim.is_multiple_of(2) {
                    return Err(Error::OddDimension(dim));
                }
                MapSpec::baker(dim)
            }
            _ => return Err(Error::InvalidParameter(format!("unknown map '{kind}'"))),
        };
        if parts.next().is_some() {
            return Err(Error::InvalidParameter(format!("{s}: trailing fields")));
        }
        Ok(spec)
    }
}
