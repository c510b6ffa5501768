use super::{AnalyticCdf, EmpiricalDistribution};
use crate::{Error, Result};

/// One-sample KS statistic `sup_x |F_M(x) − F(x)|`.
pub fn ks_distance(sample: &EmpiricalDistribution, reference: &AnalyticCdf) -> Result<f64> {
    let xs = sample.samples();
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let above = (i + 1) as f64 / m - reference.cdf(x);
        let below = reference.cdf_left(x) - i as f64 / m;
        d = d.max(above).max(below);
    }
    Ok(d)
}

/// Two-sample KS statistic, evaluated at every pooled sample point.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    let (xs, ys) = (a.samples(), b.samples());
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // Past the end of one sample the other CDF only grows toward 1, so the
    // largest remaining gap was already seen.
    Ok(d)
}

/// Asymptotic p-value of a two-sample KS statistic `d` for sample sizes
/// `n` and `m`, with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    kolmogorov_survival(lambda)
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    /// Brute force: evaluate both ECDFs everywhere they can change.
    fn brute_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
        a.samples()
            .iter()
            .chain(b.samples())
            .map(|&x| (a.cdf(x) - b.cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let a = dist(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        let b = dist(&[2.0, 1.0, 4.0, 3.0]);
        assert_eq!(ks_two_sample(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn known_two_sample_values() {
        let a = dist(&[1.0, 1.0, 4.0, 4.0]);
        let b = dist(&[1.0, 1.0, 1.0, 4.0]);
        assert!((ks_two_sample(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let a = dist(&[0.42, 0.24, 0.86, 0.85, 0.82, 0.82, 0.25, 0.78, 0.13, 0.27]);
        let b = dist(&[0.24, 0.27, 0.87, 0.29, 0.57, 0.44, 0.5, 0.00, 0.56, 0.03]);
        assert!((ks_two_sample(&a, &b).unwrap() - 0.4).abs() < 1e-15);
        assert!((brute_two_sample(&a, &b) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn two_sample_matches_brute_force_on_ties() {
        let a = dist(&[0.0, 0.0, 1.0, 2.0, 2.0, 2.0, 5.0]);
        let b = dist(&[0.0, 2.0, 2.0, 3.0]);
        assert!((ks_two_sample(&a, &b).unwrap() - brute_two_sample(&a, &b)).abs() < 1e-15);
        assert!((ks_two_sample(&b, &a).unwrap() - brute_two_sample(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn point_mass_sample_against_point_mass_cdf() {
        let a = dist(&[0.5; 10]);
        assert_eq!(ks_distance(&a, &AnalyticCdf::PointMass(0.5)).unwrap(), 0.0);
        assert_eq!(ks_distance(&a, &AnalyticCdf::PointMass(0.7)).unwrap(), 1.0);
    }

    #[test]
    fn empty_samples_are_rejected() {
        let empty = dist(&[]);
        assert!(matches!(
            ks_distance(&empty, &AnalyticCdf::Exponential),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            ks_two_sample(&empty, &dist(&[1.0])),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn p_value_limits() {
        assert_eq!(ks_p_value(0.0, 100, 100), 1.0);
        assert!(ks_p_value(0.5, 1000, 1000) < 1e-10);
        // λ ≈ 1.36 is the classic 5% point.
        let ne: f64 = 5000.0;
        let d = 1.358 / (ne.sqrt() + 0.12 + 0.11 / ne.sqrt());
        assert!((ks_p_value(d, 10_000, 10_000) - 0.05).abs() < 0.002);
    }
}
