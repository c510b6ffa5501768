//! Seedable samplers for GUE, CUE (GUE-eigenvector and Hurwitz constructions),
//! CPE, the δ-interpolating ensembles and Haar SU(2) rotations.
//!
//! All randomness comes from ChaCha20 streams addressed by `(seed, stream_id)`
//! so that every sample is reproducible bit-for-bit and independent samples
//! can be drawn in any order.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::qcore::{self, Operator, C64};
use crate::{Error, Result};

/// Address of an independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Stream for item `index` of the experiment `tag`:
    /// `stream_id = hash(tag, index)`.
    pub fn derive(seed: u64, tag: &str, index: u64) -> Self {
        RngStream {
            seed,
            stream_id: stream_hash(tag, index),
        }
    }

    pub fn generator(&self) -> Generator {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        Generator {
            rng,
            spare_gaussian: None,
        }
    }
}

/// FNV-1a over the tag, folded with the index through splitmix64.
pub fn stream_hash(tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(h ^ splitmix64(index))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Live draw sequence of an [`RngStream`].
pub struct Generator {
    rng: ChaCha20Rng,
    spare_gaussian: Option<f64>,
}

impl Generator {
    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, hi)`.
    pub fn uniform_below(&mut self, hi: f64) -> f64 {
        hi * self.uniform()
    }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// returned by the next call.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare_gaussian = Some(r * s);
        r * c
    }

    /// Uniform phase on `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        self.uniform_below(TAU)
    }
}

/// GUE matrix: real N(0,1) diagonal, complex off-diagonal entries with
/// independent real and imaginary parts of variance 1/2.
pub fn gue_sample(n: usize, gen: &mut Generator) -> Operator {
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        entries[i * n + i] = C64::new(gen.gaussian(), 0.0);
        for j in i + 1..n {
            let z = C64::new(gen.gaussian() * half, gen.gaussian() * half);
            entries[i * n + j] = z;
            entries[j * n + i] = z.conj();
        }
    }
    Operator::from_entries(n, entries).expect("n*n entries")
}

/// CUE matrix whose columns are GUE eigenvectors, each multiplied by an
/// independent uniform phase.
pub fn cue_from_gue(n: usize, gen: &mut Generator) -> Result<Operator> {
    let h = gue_sample(n, gen);
    let (_, vectors) = qcore::hermitian_eigen(&h)?;
    let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, gen.phase())).collect();
    let mut entries = vectors.into_entries();
    for row in entries.chunks_exact_mut(n) {
        for (z, p) in row.iter_mut().zip(&phases) {
            *z *= p;
        }
    }
    Ok(Operator::from_entries(n, entries)?.assume_unitary())
}

/// Elementary unitary `E^{(i,j)}(φ, ψ, χ)` with 1-based `i < j ≤ n`.
pub fn elementary_rotation(
    n: usize,
    i: usize,
    j: usize,
    phi: f64,
    psi: f64,
    chi: f64,
) -> Result<Operator> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    if i >= j {
        return Err(Error::BadIndexOrder { i, j });
    }
    let block = rotation_block(phi, psi, chi);
    let (a, b) = (i - 1, j - 1);
    let mut op = Operator::identity(n);
    let e = op.entries_mut();
    e[a * n + a] = block[0][0];
    e[a * n + b] = block[0][1];
    e[b * n + a] = block[1][0];
    e[b * n + b] = block[1][1];
    Ok(op)
}

/// The 2×2 block `[[e^{iψ}cosφ, e^{iχ}sinφ], [−e^{−iχ}sinφ, e^{−iψ}cosφ]]`.
pub(crate) fn rotation_block(phi: f64, psi: f64, chi: f64) -> [[C64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [
        [C64::from_polar(c, psi), C64::from_polar(s, chi)],
        [-C64::from_polar(s, -chi), C64::from_polar(c, -psi)],
    ]
}

/// Angles of one Hurwitz-parameterized unitary.
///
/// Composite rotation `E_s` (`s = 1..N-1`) is the product over
/// `r = s-1, …, 0` of `E^{(N-1-r, N-r)}(φ_rs, ψ_rs, χ)` where `χ = χ_s` for
/// `r = 0` and `0` otherwise. `phi[s-1][r]` and `psi[s-1][r]` store `φ_rs` and
/// `ψ_rs`; `chi[s-1]` stores `χ_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzAngles {
    pub dim: usize,
    pub delta: f64,
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
    pub alpha: f64,
}

impl HurwitzAngles {
    /// Draws angles for interpolation parameter `delta`:
    /// `ψ_rs, χ_s, α` uniform on `[0, 2πδ)`, `ξ_rs` uniform on `[0, δ)` and
    /// `φ_rs = arcsin(δ ξ_rs^{1/(2r+2)})`. At `δ = 1` this is the Haar
    /// (CUE) parameterization.
    pub fn draw(dim: usize, delta: f64, gen: &mut Generator) -> Result<Self> {
        check_delta(delta)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let alpha = gen.uniform_below(TAU * delta);
        let mut phi = Vec::with_capacity(dim.saturating_sub(1));
        let mut psi = Vec::with_capacity(dim.saturating_sub(1));
        let mut chi = Vec::with_capacity(dim.saturating_sub(1));
        for s in 1..dim {
            let mut phi_s = vec![0.0; s];
            let mut psi_s = vec![0.0; s];
            for r in (0..s).rev() {
                let xi = gen.uniform_below(delta);
                phi_s[r] = (delta * xi.powf(1.0 / (2 * r + 2) as f64)).asin();
                psi_s[r] = gen.uniform_below(TAU * delta);
            }
            chi.push(gen.uniform_below(TAU * delta));
            phi.push(phi_s);
            psi.push(psi_s);
        }
        Ok(HurwitzAngles {
            dim,
            delta,
            phi,
            psi,
            chi,
            alpha,
        })
    }

    /// `e^{iα} E_1 E_2 ⋯ E_{N-1}`.
    pub fn compose(&self) -> Operator {
        let n = self.dim;
        // Work on the transpose so each rotation touches two contiguous rows.
        let mut t = Operator::identity(n).scale(C64::from_polar(1.0, self.alpha));
        let e = t.entries_mut();
        for s in 1..n {
            for r in (0..s).rev() {
                let chi = if r == 0 { self.chi[s - 1] } else { 0.0 };
                let block = rotation_block(self.phi[s - 1][r], self.psi[s - 1][r], chi);
                rotate_row_pair(e, n, n - 2 - r, &block);
            }
        }
        Operator::from_fn(n, |r, c| t.get(c, r)).assume_unitary()
    }
}

/// `Mᵀ ← Eᵀ · Mᵀ` for `E` acting as `block` on 0-based indices `a, a + 1`,
/// i.e. `M ← M · E` applied to the stored transpose.
fn rotate_row_pair(t: &mut [C64], n: usize, a: usize, block: &[[C64; 2]; 2]) {
    let (head, tail) = t.split_at_mut((a + 1) * n);
    let (row_a, row_b) = (&mut head[a * n..], &mut tail[..n]);
    for (x, y) in row_a.iter_mut().zip(row_b.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = u * block[0][0] + v * block[1][0];
        *y = u * block[0][1] + v * block[1][1];
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1], got {delta}"
        )))
    }
}

/// Interpolating-ensemble sample `D · e^{iα} E_1 ⋯ E_{N-1}`.
///
/// For `δ < 1` the diagonal `D` of uniform phases on `[0, 2π)` multiplies
/// from the left; at `δ = 1` it is omitted and the result is Hurwitz CUE.
/// `δ = 0` gives CPE.
pub fn hurwitz_sample(n: usize, delta: f64, gen: &mut Generator) -> Result<Operator> {
    let angles = HurwitzAngles::draw(n, delta, gen)?;
    let mut u = angles.compose();
    if delta < 1.0 {
        let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, gen.phase())).collect();
        for (row, p) in u.entries_mut().chunks_exact_mut(n).zip(&phases) {
            row.iter_mut().for_each(|z| *z *= p);
        }
    }
    Ok(u)
}

/// Haar-random SU(2) rotation as a 2×2 operator.
pub fn su2_haar(gen: &mut Generator) -> Operator {
    let b = su2_haar_block(gen);
    Operator::from_entries(2, vec![b[0][0], b[0][1], b[1][0], b[1][1]])
        .expect("2x2")
        .assume_unitary()
}

/// `φ = arcsin(√ξ)`, `ψ, χ` uniform on `[0, 2π)`; draw order `ξ, ψ, χ`.
pub(crate) fn su2_haar_block(gen: &mut Generator) -> [[C64; 2]; 2] {
    let xi = gen.uniform();
    let psi = gen.phase();
    let chi = gen.phase();
    rotation_block(xi.sqrt().asin(), psi, chi)
}

/// Ensemble selector used on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnsembleSpec {
    Gue { dim: usize },
    CueFromGue { dim: usize },
    CueHurwitz { dim: usize },
    Interpolating { dim: usize, delta: f64 },
    Cpe { dim: usize },
}

impl EnsembleSpec {
    pub fn dim(&self) -> usize {
        match *self {
            EnsembleSpec::Gue { dim }
            | EnsembleSpec::CueFromGue { dim }
            | EnsembleSpec::CueHurwitz { dim }
            | EnsembleSpec::Interpolating { dim, .. }
            | EnsembleSpec::Cpe { dim } => dim,
        }
    }

    pub fn sample(&self, gen: &mut Generator) -> Result<Operator> {
        match *self {
            EnsembleSpec::Gue { dim } => Ok(gue_sample(dim, gen)),
            EnsembleSpec::CueFromGue { dim } => cue_from_gue(dim, gen),
            EnsembleSpec::CueHurwitz { dim } => hurwitz_sample(dim, 1.0, gen),
            EnsembleSpec::Interpolating { dim, delta } => hurwitz_sample(dim, delta, gen),
            EnsembleSpec::Cpe { dim } => hurwitz_sample(dim, 0.0, gen),
        }
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EnsembleSpec::Gue { dim } => write!(f, "gue:{dim}"),
            EnsembleSpec::CueFromGue { dim } => write!(f, "cue-gue:{dim}"),
            EnsembleSpec::CueHurwitz { dim } => write!(f, "cue-hurwitz:{dim}"),
            EnsembleSpec::Interpolating { dim, delta } => write!(f, "interp:{dim}:{delta}"),
            EnsembleSpec::Cpe { dim } => write!(f, "cpe:{dim}"),
        }
    }
}

pub(crate) fn parse_field<T: FromStr>(spec: &str, field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::InvalidParameter(format!("{spec}: missing {what}")))?
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{spec}: bad {what}")))
}

impl FromStr for EnsembleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let dim: usize = parse_field(s, parts.next(), "dimension")?;
        if dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "{s}: dimension must be >= 1"
            )));
        }
        let spec = match kind {
            "gue" => EnsembleSpec::Gue { dim },
            "cue-gue" => EnsembleSpec::CueFromGue { dim },
            "cue-hurwitz" => EnsembleSpec::CueHurwitz { dim },
            "cpe" => EnsembleSpec::Cpe { dim },
            "interp" => {
                let delta: f64 = parse_field(s, parts.next(), "delta")?;
                check_delta(delta)?;
                EnsembleSpec::Interpolating { dim, delta }
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown ensemble '{kind}'"
                )))
            }
        };
        if parts.next().is_some() {
            return Err(Error::InvalidParameter(format!("{s}: trailing fields")));
        }
        Ok(spec)
    }
}

/// Average of `|E_12|²` for a Haar SU(2) rotation; used by tests and
/// diagnostics.
pub const HAAR_SU2_OFF_DIAGONAL_MEAN: f64 = 0.5;
