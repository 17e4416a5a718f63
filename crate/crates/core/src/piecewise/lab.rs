use num_traits::{One, Zero};
use serde::Serialize;

use super::{rational_from_f64, to_f64, PiecewiseJson, PiecewisePolyDensity, PolyPiece, Rational};
use crate::criteria::{check_monotone_density, numeric_certify, Conclusion, Evidence, Grade, SkewVerdict, Witness};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::pmean::{sign_integral_at, solve_pmean, DnuSign};

/// Two-step density: `λ` on `[0, 1)` and `1 − λ` on `[1, 2)`.
pub fn counterexample_density(lambda: f64) -> Result<PiecewisePolyDensity> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let l = rational_from_f64(lambda)?;
    let one = Rational::one();
    let two = &one + &one;
    PiecewisePolyDensity::new(vec![
        PolyPiece::new(Rational::zero(), one.clone(), vec![l.clone()]),
        PolyPiece::new(one.clone(), two, vec![one - l]),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub lambda: f64,
    /// Verdict for one summand.
    pub summand: SkewVerdict,
    /// Exact density of the sum of two independent copies.
    pub sum_density: PiecewiseJson,
    pub sum_mass_residual: f64,
    /// Median of the sum from the p-mean solver.
    pub median: f64,
    pub median_error: f64,
    /// Median from solving the piecewise quadratic CDF directly.
    pub median_closed_form: Option<f64>,
    /// `∫log y f(ν+y)dy − ∫log y f(ν−y)dy` at the median of the sum.
    pub sign_difference: f64,
    pub sign_uncertainty: f64,
    pub sign: DnuSign,
    /// Verdict for the sum at `p = 1`.
    pub sum: SkewVerdict,
}

impl CounterexampleReport {
    /// True when the summand is certified truly positive and the sum is refuted.
    pub fn sum_breaks_skewness(&self) -> bool {
        self.summand.conclusion == Conclusion::TrulyPositive && self.sum.conclusion == Conclusion::NotTrulyPositive
    }
}

/// Builds the two-step density for `λ ∈ (1/2, 1)`, certifies it through its
/// monotone density, convolves it with itself and evaluates the sign of
/// `dν/dp` for the sum at `p = 1`.
pub fn counterexample_report(lambda: f64) -> Result<CounterexampleReport> {
    if !(lambda > 0.5 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (1/2, 1) for a decreasing summand, got {lambda}"
        )));
    }
    let f = counterexample_density(lambda)?;
    let x = DistributionSpec::piecewise(f.clone())?;
    let summand = check_monotone_density(&x)
        .ok_or_else(|| Error::Undefined("summand density is not monotone".into()))?;

    let z = f.convolve(&f)?;
    let sum_mass_residual = to_f64(&(z.total_mass_exact() - Rational::one())).abs();
    let median_closed_form = piecewise_linear_median(&z);
    let zs = DistributionSpec::piecewise(z.clone())?;
    let point = solve_pmean(&zs, 1.0, 1e-13)?;
    let s = sign_integral_at(&zs, 1.0, point.nu, point.nu_error)?;

    let scope = format!("p = 1, median {}", point.nu);
    let ev = Evidence::new("derivative_sign", scope, s.sign != DnuSign::Decreasing)
        .with("median", point.nu)
        .with("difference", s.difference)
        .with("uncertainty", s.uncertainty);
    let sum = if s.sign == DnuSign::Decreasing {
        let mut v = SkewVerdict::new(&zs, Conclusion::NotTrulyPositive, Some(Grade::Refuted));
        v.evidence.push(ev);
        v.witness = Some(Witness::Decrease {
            p: 1.0,
            difference: s.difference,
            uncertainty: s.uncertainty,
        });
        v
    } else {
        SkewVerdict::indeterminate(&zs, vec![ev.note("no decrease at p = 1")])
    };

    Ok(CounterexampleReport {
        lambda,
        summand,
        sum_density: z.to_json(),
        sum_mass_residual,
        median: point.nu,
        median_error: point.nu_error,
        median_closed_form,
        sign_difference: s.difference,
        sign_uncertainty: s.uncertainty,
        sign: s.sign,
        sum,
    })
}

/// Median of a density whose pieces are at most linear, from the quadratic CDF.
fn piecewise_linear_median(d: &PiecewisePolyDensity) -> Option<f64> {
    let half = Rational::one() / (Rational::one() + Rational::one());
    let mut before = Rational::zero();
    for piece in d.pieces() {
        if piece.degree() > 1 {
            return None;
        }
        let mass = piece.mass();
        if &before + &mass < half {
            before += mass;
            continue;
        }
        let c0 = piece.coeffs.first().map(to_f64).unwrap_or(0.0);
        let c1 = piece.coeffs.get(1).map(to_f64).unwrap_or(0.0);
        let a = to_f64(&piece.a);
        // c1/2 (x² − a²) + c0 (x − a) = 1/2 − before, in t = x − a
        let r = to_f64(&(&half - &before));
        let (qa, qb, qc) = (0.5 * c1, c0 + c1 * a, -r);
        let t = if qa == 0.0 {
            -qc / qb
        } else {
            // root with t ≥ 0; written to avoid cancellation
            2.0 * -qc / (qb + (qb * qb - 4.0 * qa * qc).sqrt())
        };
        return Some(a + t);
    }
    None
}

/// Decreasing linear density `h − h²x/2` on `[0, 2/h]`.
pub fn linear_density(h: f64) -> Result<PiecewisePolyDensity> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let h = rational_from_f64(h)?;
    let two = Rational::one() + Rational::one();
    let end = &two / &h;
    let slope = -(&h * &h) / &two;
    PiecewisePolyDensity::new(vec![PolyPiece::new(Rational::zero(), end, vec![h, slope])])
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearClosureReport {
    pub h1: f64,
    pub h2: f64,
    pub summands: [SkewVerdict; 2],
    pub sum_mass_residual: f64,
    pub grid: Vec<f64>,
    pub sum: SkewVerdict,
}

/// Grid `1, 1.5, …, 12` used for the sum of two linear densities.
pub fn closure_grid() -> Vec<f64> {
    (0..=22).map(|i| 1.0 + 0.5 * i as f64).collect()
}

/// Convolves two decreasing linear densities and certifies the sum on
/// [`closure_grid`].
pub fn linear_closure_check(h1: f64, h2: f64) -> Result<LinearClosureReport> {
    let f = linear_density(h1)?;
    let g = linear_density(h2)?;
    let verdict = |d: &PiecewisePolyDensity| -> Result<SkewVerdict> {
        let spec = DistributionSpec::piecewise(d.clone())?;
        check_monotone_density(&spec).ok_or_else(|| Error::Undefined("linear density is not monotone".into()))
    };
    let summands = [verdict(&f)?, verdict(&g)?];
    let z = f.convolve(&g)?;
    let sum_mass_residual = to_f64(&(z.total_mass_exact() - Rational::one())).abs();
    let grid = closure_grid();
    let sum = numeric_certify(&DistributionSpec::piecewise(z)?, &grid, 0.0)?;
    Ok(LinearClosureReport {
        h1,
        h2,
        summands,
        sum_mass_residual,
        grid,
        sum,
    })
}
