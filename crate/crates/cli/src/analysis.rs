//! Helpers shared by the experiment runners and the acceptance checks.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use rmtlab::ensembles::RngStream;
use rmtlab::qcore::{spectral_decomposition, Operator, OPERATOR_MAGIC};
use rmtlab::stats::{
    build_reference_library, default_delta_grid, eigenphase_spacings, eigenvector_amplitudes,
    element_amplitudes, EmpiricalDistribution, ReferenceLibrary, AMPLITUDE_HISTOGRAM_RANGE,
    HISTOGRAM_BINS, SPACING_HISTOGRAM_RANGE,
};

/// Pooled statistics of a set of operators.
pub struct Families {
    pub elements: EmpiricalDistribution,
    pub eigenvectors: EmpiricalDistribution,
    pub spacings: EmpiricalDistribution,
}

pub fn element_family(ops: &[Operator]) -> EmpiricalDistribution {
    let parts: Vec<_> = ops.par_iter().map(element_amplitudes).collect();
    EmpiricalDistribution::pooled(&parts)
}

pub fn families(ops: &[Operator]) -> Result<Families> {
    let spectral: Vec<_> = ops
        .par_iter()
        .map(|u| {
            let s = spectral_decomposition(u)?;
            Ok((eigenvector_amplitudes(&s), eigenphase_spacings(&s)))
        })
        .collect::<rmtlab::Result<_>>()?;
    Ok(Families {
        elements: element_family(ops),
        eigenvectors: EmpiricalDistribution::pooled(spectral.iter().map(|s| &s.0)),
        spacings: EmpiricalDistribution::pooled(spectral.iter().map(|s| &s.1)),
    })
}

pub fn amplitude_histogram_csv(d: &EmpiricalDistribution) -> String {
    let (lo, hi) = AMPLITUDE_HISTOGRAM_RANGE;
    d.histogram(HISTOGRAM_BINS, lo, hi).to_csv()
}

pub fn spacing_histogram_csv(d: &EmpiricalDistribution) -> String {
    let (lo, hi) = SPACING_HISTOGRAM_RANGE;
    d.histogram(HISTOGRAM_BINS, lo, hi).to_csv()
}

pub fn q_histogram_csv(d: &EmpiricalDistribution) -> String {
    d.histogram(HISTOGRAM_BINS, 0.0, 1.0).to_csv()
}

/// Haar average of `Q` for `n` qubits: one-qubit purity `(2 + N/2)/(N + 1)`.
pub fn haar_mean_q(n_qubits: usize) -> f64 {
    let dim = (1usize << n_qubits) as f64;
    2.0 - 2.0 * (2.0 + dim / 2.0) / (dim + 1.0)
}

/// Analytic density curves at the bin centres of the amplitude and spacing
/// histograms.
pub fn reference_curves_csv() -> String {
    use rmtlab::stats::AnalyticCdf;
    let mut out = String::from("x,exponential,wigner_surmise_cue\n");
    let (lo, hi) = AMPLITUDE_HISTOGRAM_RANGE;
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    for k in 0..HISTOGRAM_BINS {
        let x = lo + width * (k as f64 + 0.5);
        let e = AnalyticCdf::Exponential.pdf(x).unwrap_or_default();
        let w = AnalyticCdf::WignerSurmiseCue.pdf(x).unwrap_or_default();
        let _ = writeln!(out, "{x},{e},{w}");
    }
    out
}

/// Reads an operator file in either the binary or the JSON form.
pub fn read_operator(path: &Path) -> Result<Operator> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let op = if bytes.starts_with(OPERATOR_MAGIC) {
        Operator::read_binary(bytes.as_slice())
    } else {
        let text = std::str::from_utf8(&bytes)
            .with_context(|| format!("{} is not UTF-8", path.display()))?;
        Operator::from_json(text)
    };
    op.with_context(|| format!("decoding {}", path.display()))
}

/// Where a reference library comes from and how it is built when missing.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRequest {
    pub dim: usize,
    pub samples_per_delta: usize,
    pub seed: u64,
}

impl ReferenceRequest {
    pub fn stream(&self) -> RngStream {
        RngStream::derive(self.seed, "reference", 0)
    }

    pub fn build(&self) -> Result<ReferenceLibrary> {
        Ok(build_reference_library(
            self.dim,
            &default_delta_grid(),
            self.samples_per_delta,
            self.stream(),
        )?)
    }

    pub fn matches(&self, lib: &ReferenceLibrary) -> bool {
        let s = self.stream();
        lib.meta.dim == self.dim
            && lib.meta.samples_per_delta == self.samples_per_delta
            && lib.meta.seed == s.seed
            && lib.meta.stream_id == s.stream_id
            && lib.delta_grid == default_delta_grid()
    }

    /// Loads `path` when it holds a matching library; otherwise builds one
    /// and saves it there.
    pub fn load_or_build(&self, path: &Path) -> Result<ReferenceLibrary> {
        if path.exists() {
            let lib = ReferenceLibrary::load(path)
                .with_context(|| format!("loading {}", path.display()))?;
            if self.matches(&lib) {
                return Ok(lib);
            }
        }
        let lib = self.build()?;
        lib.save(path)
            .with_context(|| format!("saving {}", path.display()))?;
        Ok(lib)
    }
}

/// Loads a user-supplied library; unlike [`ReferenceRequest::load_or_build`]
/// any stored parameters are accepted as long as the dimension fits.
pub fn load_library(path: &Path, dim: usize) -> Result<ReferenceLibrary> {
    let lib =
        ReferenceLibrary::load(path).with_context(|| format!("loading {}", path.display()))?;
    if lib.meta.dim != dim {
        bail!(
            "reference library {} was built at N = {}, inputs have N = {dim}",
            path.display(),
            lib.meta.dim
        );
    }
    Ok(lib)
}
