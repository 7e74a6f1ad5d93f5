//! Scalar probability functions shared by effect inference, residual
//! diagnostics, and outlier screening.

use crate::error::{Error, Result};

/// Natural logarithm of the gamma function.
///
/// Lanczos approximation with g = 7 and nine coefficients; accurate to
/// roughly 1e-13 over the positive reals.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma function P(a, x).
///
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
pub fn lower_gamma_regularized(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape parameter must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Σ x^n Γ(a) / Γ(a + 1 + n), scaled by x^a e^{-x} / Γ(a)
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 1.0;
        while term.abs() > sum.abs() * 1e-16 && n < 1e6 {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
        }
        (ln_prefactor.exp() * sum).min(1.0)
    } else {
        // Q(a, x) via modified Lentz; P = 1 − Q
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        loop {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 || i > 1e6 {
                break;
            }
            i += 1.0;
        }
        (1.0 - ln_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}

/// Quantile of the chi-square distribution with `dof` degrees of freedom,
/// solved by bisection on [`lower_gamma_regularized`].
pub fn chi_square_quantile(prob: f64, dof: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&prob) {
        return Err(Error::InvalidSpec(format!(
            "chi-square quantile probability must lie in [0, 1), got {prob}"
        )));
    }
    if dof <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "chi-square degrees of freedom must be positive, got {dof}"
        )));
    }
    if prob == 0.0 {
        return Ok(0.0);
    }
    let cdf = |x: f64| lower_gamma_regularized(dof / 2.0, x / 2.0);
    let mut hi = dof + 10.0 * (2.0 * dof).sqrt() + 10.0;
    let mut guard = 0;
    while cdf(hi) < prob {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::InvalidSpec(format!(
                "chi-square quantile bracket failed for prob {prob}, dof {dof}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normal probability density with mean `mu` and standard deviation `sigma`.
pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Two-sided tail probability of a standard-normal statistic.
///
/// Clamped below at the smallest positive normal so the −log10 mapping
/// stays finite; the clamp binds only past |z| ≈ 37.5.
pub fn normal_two_sided_p(z: f64) -> f64 {
    let p = statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2);
    p.clamp(f64::MIN_POSITIVE, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_matches_factorials() {
        // Γ(n) = (n−1)!
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(ln_gamma(5.0), 24.0_f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(ln_gamma(11.0), 3_628_800.0_f64.ln(), epsilon = 1e-12);
        // Γ(1/2) = √π
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn incomplete_gamma_limits() {
        assert_eq!(lower_gamma_regularized(2.5, 0.0), 0.0);
        assert!(lower_gamma_regularized(2.5, 1e6) > 1.0 - 1e-12);
        // P(1, x) = 1 − e^{−x}
        assert_relative_eq!(
            lower_gamma_regularized(1.0, 1.3),
            1.0 - (-1.3_f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn chi_square_quantile_against_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for &(prob, dof) in &[(0.95, 1.0), (0.999, 4.0), (0.5, 10.0), (0.99, 17.0)] {
            let oracle = ChiSquared::new(dof).unwrap().inverse_cdf(prob);
            let ours = chi_square_quantile(prob, dof).unwrap();
            assert_relative_eq!(ours, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn chi_square_quantile_known_value() {
        // √χ²₁(0.95) is the familiar 1.96 two-sided normal cutoff.
        let q = chi_square_quantile(0.95, 1.0).unwrap();
        assert_relative_eq!(q.sqrt(), 1.959_963_985, epsilon = 1e-6);
    }

    #[test]
    fn chi_square_quantile_rejects_bad_inputs() {
        assert!(chi_square_quantile(1.5, 2.0).is_err());
        assert!(chi_square_quantile(0.5, 0.0).is_err());
    }

    #[test]
    fn normal_pdf_peak() {
        let sigma = 2.0;
        let peak = normal_pdf(3.0, 3.0, sigma);
        assert_relative_eq!(
            peak,
            1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn two_sided_p_basics() {
        assert_eq!(normal_two_sided_p(0.0), 1.0);
        // z = 1.959963985 is the 5% two-sided point
        assert_relative_eq!(normal_two_sided_p(1.959_963_985), 0.05, epsilon = 1e-9);
        // symmetric in z
        assert_eq!(normal_two_sided_p(-2.3), normal_two_sided_p(2.3));
        // huge statistics stay strictly positive
        assert!(normal_two_sided_p(1e6) > 0.0);
    }
}
