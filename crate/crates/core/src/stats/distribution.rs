use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::qcore::{Operator, SpectralData};
use crate::{pairwise_sum, Error, Result};

pub const HISTOGRAM_BINS: usize = 50;
pub const AMPLITUDE_HISTOGRAM_RANGE: (f64, f64) = (0.0, 8.0);
pub const SPACING_HISTOGRAM_RANGE: (f64, f64) = (0.0, 4.0);

/// Sorted, finite sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample {bad}")));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    /// Merges several distributions; the result does not depend on the
    /// order of the parts.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a EmpiricalDistribution>) -> Self {
        let mut samples: Vec<f64> = parts
            .into_iter()
            .flat_map(|d| d.samples.iter().copied())
            .collect();
        samples.sort_unstable_by(f64::total_cmp);
        EmpiricalDistribution { samples }
    }

    pub(crate) fn from_sorted_unchecked(samples: Vec<f64>) -> Self {
        debug_assert!(samples.windows(2).all(|w| w[0] <= w[1]));
        EmpiricalDistribution { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| pairwise_sum(&self.samples) / self.len() as f64)
    }

    /// `#(samples ≤ x) / M`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Evenly spaced order statistics: `points` samples at ranks
    /// `⌊(i + ½)·M / points⌋`. The returned CDF differs from the original by
    /// at most `1/points` everywhere.
    pub fn thinned(&self, points: usize) -> Self {
        let m = self.len();
        if points == 0 || m <= points {
            return self.clone();
        }
        let samples = (0..points)
            .map(|i| self.samples[((2 * i + 1) * m) / (2 * points)])
            .collect();
        EmpiricalDistribution { samples }
    }

    /// Histogram with `bins` uniform bins on `[lo, hi)`; the last bin is
    /// closed. Densities are normalized over the in-range samples.
    pub fn histogram(&self, bins: usize, lo: f64, hi: f64) -> Histogram {
        assert!(bins > 0 && hi > lo, "invalid histogram layout");
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        let mut outside = 0u64;
        for &x in &self.samples {
            if x < lo || x > hi {
                outside += 1;
                continue;
            }
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let edges = (0..=bins).map(|k| lo + width * k as f64).collect();
        Histogram {
            edges,
            counts,
            outside,
        }
    }

    /// One `value` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 20 + 8);
        out.push_str("value\n");
        for x in &self.samples {
            let _ = writeln!(out, "{x}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples that fell outside `[edges[0], edges[last]]`.
    pub outside: u64,
}

impl Histogram {
    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn densities(&self) -> Vec<f64> {
        let total = self.in_range();
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / (total as f64 * (w[1] - w[0]))
                }
            })
            .collect()
    }

    /// `bin_left,bin_right,density`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for (w, d) in self.edges.windows(2).zip(self.densities()) {
            let _ = writeln!(out, "{},{},{}", w[0], w[1], d);
        }
        out
    }
}

fn scaled_squared_moduli(op: &Operator) -> Vec<f64> {
    let n = op.dim() as f64;
    op.entries().iter().map(|z| n * z.norm_sqr()).collect()
}

/// All `N²` rescaled element amplitudes `x = N|U_ij|²`.
pub fn element_amplitudes(u: &Operator) -> EmpiricalDistribution {
    EmpiricalDistribution::new(scaled_squared_moduli(u)).expect("finite operator entries")
}

/// All `N²` rescaled eigenvector amplitudes `y = N|c^l_k|²`.
pub fn eigenvector_amplitudes(s: &SpectralData) -> EmpiricalDistribution {
    element_amplitudes(&s.vectors)
}

/// `N` nearest-neighbour gaps of the eigenphases around the circle (the
/// wrap-around gap included), rescaled by `N/2π` to unit mean.
pub fn eigenphase_spacings(s: &SpectralData) -> EmpiricalDistribution {
    let n = s.phases.len();
    let mut phases = s.phases.clone();
    phases.sort_unstable_by(f64::total_cmp);
    let scale = n as f64 / TAU;
    let mut gaps: Vec<f64> = phases.windows(2).map(|w| (w[1] - w[0]) * scale).collect();
    if let (Some(first), Some(last)) = (phases.first(), phases.last()) {
        gaps.push((first + TAU - last) * scale);
    }
    EmpiricalDistribution::new(gaps).expect("finite phases")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::spectral_decomposition;

    #[test]
    fn identity_amplitudes() {
        let d = element_amplitudes(&Operator::identity(4));
        let mut expected = vec![0.0; 12];
        expected.extend([4.0; 4]);
        assert_eq!(d.samples(), expected.as_slice());
        let s = spectral_decomposition(&Operator::identity(4)).unwrap();
        assert_eq!(eigenvector_amplitudes(&s).samples(), expected.as_slice());
    }

    #[test]
    fn roots_of_unity_have_unit_spacings() {
        let n = 16;
        let phases: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let s = spectral_decomposition(&Operator::diagonal_phases(&phases)).unwrap();
        for x in eigenphase_spacings(&s).samples() {
            assert!((x - 1.0).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn identity_spacings_are_degenerate() {
        let s = spectral_decomposition(&Operator::identity(5)).unwrap();
        let d = eigenphase_spacings(&s);
        assert_eq!(d.samples(), &[0.0, 0.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn cdf_counts_ties() {
        let d = EmpiricalDistribution::new(vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(1.0), 0.5);
        assert_eq!(d.cdf(2.5), 0.75);
        assert_eq!(d.cdf(3.0), 1.0);
        assert!(EmpiricalDistribution::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn thinning_keeps_cdf_within_one_over_points() {
        let samples: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 10_007) as f64).collect();
        let d = EmpiricalDistribution::new(samples).unwrap();
        let t = d.thinned(100);
        assert_eq!(t.len(), 100);
        for x in [0.0, 500.5, 2_000.0, 5_000.0, 9_999.0] {
            assert!((d.cdf(x) - t.cdf(x)).abs() <= 1.0 / 100.0 + 1e-12);
        }
    }

    #[test]
    fn histogram_integrates_to_one() {
        let d = EmpiricalDistribution::new((0..1000).map(|i| i as f64 / 100.0).collect()).unwrap();
        let h = d.histogram(
            HISTOGRAM_BINS,
            AMPLITUDE_HISTOGRAM_RANGE.0,
            AMPLITUDE_HISTOGRAM_RANGE.1,
        );
        let integral: f64 = h
            .densities()
            .iter()
            .zip(h.edges.windows(2))
            .map(|(p, w)| p * (w[1] - w[0]))
            .sum();
        assert!((integral - 1.0).abs() < 1e-9);
        assert_eq!(h.outside, 199);
        assert!(h
            .to_csv()
            .starts_with("bin_left,bin_right,density\n0,0.16,"));
    }
}
