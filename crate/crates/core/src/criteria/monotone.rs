use super::{Conclusion, Evidence, Grade, SkewVerdict};
use crate::dist::{graded_grid, DistributionSpec, Family};

const CRITERION: &str = "monotone_density";
const SAMPLES: usize = 2000;

/// Grid-sampled monotonicity of the density in family coordinates:
/// `(non_increasing, strict_drop, non_decreasing, strict_rise)`.
fn sampled(spec: &DistributionSpec) -> (bool, bool, bool, bool) {
    let fam = spec.family();
    let vals: Vec<f64> = graded_grid(fam, SAMPLES).into_iter().map(|x| fam.pdf(x)).collect();
    let (mut inc, mut drop, mut dec, mut rise) = (true, false, true, false);
    for w in vals.windows(2) {
        let tol = 1e-12 * w[0].max(w[1]);
        if w[1] > w[0] + tol {
            inc = false;
            rise = true;
        }
        if w[1] < w[0] - tol {
            dec = false;
            drop = true;
        }
    }
    (inc, drop, dec, rise)
}

/// Monotone-density criterion: a non-increasing density with at least one
/// strict drop and a finite lower end is truly positively skewed; the mirror
/// statement gives true negative skewness. `None` when inapplicable.
pub fn check_monotone_density(spec: &DistributionSpec) -> Option<SkewVerdict> {
    let fam = spec.family();
    let (lo, hi) = fam.support();
    let (non_inc, drop, non_dec, rise, grade, how) = if fam.provably_decreasing() {
        (true, true, false, false, Grade::Analytic, "family parameters")
    } else if let Family::Piecewise(d) = fam {
        let m = d.monotonicity();
        (m.non_increasing, m.strict_drop, m.non_decreasing, m.strict_rise, Grade::Analytic, "exact piece slopes")
    } else {
        let (a, b, c, d) = sampled(spec);
        (a, b, c, d, Grade::Numeric, "density sampled on a 2000-point graded grid")
    };
    // in family coordinates: decreasing with finite lower end, or increasing
    // with finite upper end
    let base_positive = non_inc && drop && lo.is_finite();
    let base_negative = non_dec && rise && hi.is_finite();
    if !base_positive && !base_negative {
        return None;
    }
    let positive = base_positive != spec.is_reflected();
    let conclusion = if positive { Conclusion::TrulyPositive } else { Conclusion::TrulyNegative };
    let scope = if positive {
        "density non-increasing on its support with a finite lower end"
    } else {
        "density non-decreasing on its support with a finite upper end"
    };
    let mut v = SkewVerdict::new(spec, conclusion, Some(grade));
    v.evidence.push(Evidence::new(CRITERION, scope, true).note(format!("monotonicity from {how}")));
    Some(v)
}
