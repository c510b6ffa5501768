use std::f64::consts::PI;

/// Closed-form reference distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticCdf {
    /// `1 − e^{−x}`: CUE element amplitudes, GUE eigenvector amplitudes and
    /// Poisson spacings.
    Exponential,
    /// β = 2 Wigner surmise `P(s) = (32/π²) s² e^{−4s²/π}`.
    WignerSurmiseCue,
    /// Unit step at the given point.
    PointMass(f64),
}

impl AnalyticCdf {
    pub const POISSON_SPACING: AnalyticCdf = AnalyticCdf::Exponential;

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            AnalyticCdf::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            AnalyticCdf::WignerSurmiseCue => {
                if x <= 0.0 {
                    0.0
                } else {
                    libm::erf(2.0 * x / PI.sqrt()) - 4.0 * x / PI * (-4.0 * x * x / PI).exp()
                }
            }
            AnalyticCdf::PointMass(a) => {
                if x >= a {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Left limit `F(x⁻)`; differs from [`cdf`](Self::cdf) only at atoms.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            AnalyticCdf::PointMass(a) => {
                if x > a {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.cdf(x),
        }
    }

    /// Density; `None` for the point mass.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match *self {
            AnalyticCdf::Exponential => Some(if x < 0.0 { 0.0 } else { (-x).exp() }),
            AnalyticCdf::WignerSurmiseCue => Some(if x < 0.0 {
                0.0
            } else {
                32.0 / (PI * PI) * x * x * (-4.0 * x * x / PI).exp()
            }),
            AnalyticCdf::PointMass(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticCdf::Exponential => "exponential",
            AnalyticCdf::WignerSurmiseCue => "wigner_surmise_cue",
            AnalyticCdf::PointMass(_) => "point_mass",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson's rule, independent of the closed forms above.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        let h = (b - a) / intervals as f64;
        let mut sum = f(a) + f(b);
        for i in 1..intervals {
            let x = a + h * i as f64;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        sum * h / 3.0
    }

    #[test]
    fn wigner_cdf_matches_quadrature() {
        let pdf = |u: f64| 32.0 / (PI * PI) * u * u * (-4.0 * u * u / PI).exp();
        for s in [0.1, 0.5, 1.0, 1.7, 3.0] {
            let q = simpson(pdf, 0.0, s, 2000);
            assert!(
                (AnalyticCdf::WignerSurmiseCue.cdf(s) - q).abs() < 1e-12,
                "s={s}"
            );
        }
        assert!((AnalyticCdf::WignerSurmiseCue.cdf(50.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_cdf() {
        assert_eq!(AnalyticCdf::Exponential.cdf(-1.0), 0.0);
        assert!((AnalyticCdf::Exponential.cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn point_mass_limits() {
        let p = AnalyticCdf::PointMass(0.5);
        assert_eq!(p.cdf(0.5), 1.0);
        assert_eq!(p.cdf_left(0.5), 0.0);
        assert_eq!(p.cdf(0.4), 0.0);
    }
}
