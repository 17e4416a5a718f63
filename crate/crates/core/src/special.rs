//! Normal-distribution special functions with tail-accurate logarithms.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use statrs::function::erf;

use crate::quadrature::{integrate_fn, Tolerance};

/// `ln(1/√(2π))`
pub const LN_INV_SQRT_2PI: f64 = -0.918_938_533_204_672_8;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (LN_INV_SQRT_2PI - 0.5 * x * x).exp()
}

/// Standard normal CDF, relative-accurate in the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)` without underflow for very negative `x`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > 5.0 {
        (-norm_cdf(-x)).ln_1p()
    } else if x > -30.0 {
        norm_cdf(x).ln()
    } else {
        // Φ(x) = φ(x)/|x| · (1 − 1/x² + 3/x⁴ − 15/x⁶ + ...)
        let z = 1.0 / (x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..8 {
            term *= -((2 * k - 1) as f64) * z;
            sum += term;
        }
        LN_INV_SQRT_2PI - 0.5 * x * x - (-x).ln() + sum.ln()
    }
}

/// `φ(x)/Φ(x)`, the inverse Mills ratio reflected, stable for any `x`.
pub fn norm_hazard_reflected(x: f64) -> f64 {
    (LN_INV_SQRT_2PI - 0.5 * x * x - log_norm_cdf(x)).exp()
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Starting value from the inverse error function, polished by Halley steps
    // against the accurate forward CDF.
    let mut x = -SQRT_2 * erf::erfc_inv(2.0 * p);
    for _ in 0..2 {
        if !x.is_finite() {
            break;
        }
        let (cdf, pdf) = if x < 0.0 {
            (norm_cdf(x), norm_pdf(x))
        } else {
            (1.0 - norm_cdf(-x), norm_pdf(x))
        };
        if pdf == 0.0 {
            break;
        }
        let u = (cdf - p) / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Owen's T function `T(h, a) = (1/2π) ∫₀^a exp(−h²(1+x²)/2)/(1+x²) dx`.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if a < 0.0 {
        return -owens_t(h, -a);
    }
    let hh = 0.5 * h * h;
    let f = |x: f64| {
        let q = 1.0 + x * x;
        (-hh * q).exp() / q
    };
    // Past x_cut the integrand is below e^{-745} relative to its peak.
    let x_cut = if hh > 0.0 { (745.0 / hh).sqrt() } else { f64::INFINITY };
    let upper = a.min(x_cut);
    integrate_fn(f, 0.0, upper, Tolerance::new(1e-13, 1e-300))
        .map(|r| r.value / (2.0 * PI))
        .unwrap_or(f64::NAN)
}

/// Skew-normal CDF `Φ(x) − 2T(x, α)`.
pub fn skew_normal_cdf(x: f64, alpha: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    (norm_cdf(x) - 2.0 * owens_t(x, alpha)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cdf_matches_direct_in_overlap() {
        for &x in &[-29.0, -10.0, -1.0, 0.0, 3.0, 8.0] {
            let direct = norm_cdf(x).ln();
            assert!((log_norm_cdf(x) - direct).abs() < 1e-12 * direct.abs().max(1.0), "{x}");
        }
        // continuity across the asymptotic switch
        let a = log_norm_cdf(-30.0 + 1e-9);
        let b = log_norm_cdf(-30.0 - 1e-9);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn owens_t_known_values() {
        // T(h, 1) = Φ(h)(1 − Φ(h))/2
        for &h in &[0.0, 0.5, 1.3, 2.0] {
            let p = norm_cdf(h);
            let d = owens_t(h, 1.0) - 0.5 * p * (1.0 - p);
            assert!(d.abs() < 1e-14, "h = {h}: {d:e}");
        }
        // T(0, a) = atan(a)/(2π)
        assert!((owens_t(0.0, 3.0) - 3.0f64.atan() / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn skew_normal_cdf_zero_alpha_is_normal() {
        for &x in &[-2.0, 0.0, 1.7] {
            assert!((skew_normal_cdf(x, 0.0) - norm_cdf(x)).abs() < 1e-15);
        }
        // F(0; α) = 1/2 − atan(α)/π
        assert!((skew_normal_cdf(0.0, 5.0) - (0.5 - 5.0f64.atan() / PI)).abs() < 1e-13);
    }
}
