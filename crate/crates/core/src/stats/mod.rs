//! Empirical distributions of matrix-element amplitudes, eigenvector
//! amplitudes and eigenphase spacings; analytic reference CDFs; KS distances;
//! δ-fitting against interpolating-ensemble references.

mod cdf;
mod distribution;
mod ks;
mod reference;

pub use cdf::AnalyticCdf;
pub use distribution::{
    eigenphase_spacings, eigenvector_amplitudes, element_amplitudes, EmpiricalDistribution,
    Histogram, AMPLITUDE_HISTOGRAM_RANGE, HISTOGRAM_BINS, SPACING_HISTOGRAM_RANGE,
};
pub use ks::{ks_distance, ks_p_value, ks_two_sample};
pub use reference::{
    build_reference_library, build_reference_library_with, default_delta_grid, delta_fit,
    manifest_path, DeltaFitResult, ReferenceKind, ReferenceLibrary, ReferenceMeta,
    DEFAULT_MAX_REFERENCE_POINTS, REFERENCE_MAGIC,
};
