//! Fréchet p-means of univariate distributions.
//!
//! For `p ≥ 1` the p-mean `ν_p` is the root in `a` of the balance
//! `Φ(a, p) = E[(X − a)_+^{p−1}] − E[(a − X)_+^{p−1}]`. The two expectations
//! are weighted half-integrals of the density on either side of `a`; they are
//! evaluated in family coordinates, where supports have exact endpoints, and
//! transported through the spec's affine map.

mod curve;
mod discrete;

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_tail_truncated, Integrand, QuadResult, TailCutoff, Tolerance};
use crate::roots::{bisect_predicate, brent};

pub use curve::{p_grid, trace_curve, trace_curve_with, verify_affine_equivariance, AffineReport, PDomain, PMeanCurve};
pub use discrete::{discrete_pmean, empirical_pmean};

/// Smallest admitted gap between `p` and the moment ceiling `1 + moment_sup`.
pub const CEILING_MARGIN: f64 = 1e-3;

/// Sign of `dν/dp` at a point of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DnuSign {
    Increasing,
    Decreasing,
    Flat,
    Unknown,
}

impl DnuSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            DnuSign::Increasing => "increasing",
            DnuSign::Decreasing => "decreasing",
            DnuSign::Flat => "flat",
            DnuSign::Unknown => "unknown",
        }
    }
}

/// A solved p-mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMeanPoint {
    pub p: f64,
    pub nu: f64,
    /// `Φ(ν, p)` at the returned root.
    pub balance_residual: f64,
    /// `E[(X−ν)_+^{p−1}] + E[(ν−X)_+^{p−1}]`, the scale the residual is judged against.
    pub balance_scale: f64,
    /// Bound on `|ν − ν_true|` from the final bracket and quadrature error.
    pub nu_error: f64,
    pub dnu_sign: DnuSign,
    pub dnu_dp: Option<f64>,
    /// `∫y^{p−1}log y f(ν+y)dy − ∫y^{p−1}log y f(ν−y)dy` when evaluated.
    pub sign_integral: Option<f64>,
    /// Set at `p = 1` when the CDF is flat at one half and the left median is reported.
    pub flat_median: bool,
}

/// Outcome of the derivative-sign functional at a solved p-mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignIntegral {
    pub sign: DnuSign,
    /// Integral difference in the spec's coordinates.
    pub difference: f64,
    /// Combined quadrature error and sensitivity to the uncertainty in `ν`.
    pub uncertainty: f64,
    /// `dν/dp`; only available in closed form at `p = 1`.
    pub dnu_dp: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Weight {
    Power,
    PowerLog,
}

/// Checks `p` against the domain `[1, 1 + moment_sup)`.
pub fn check_p(spec: &DistributionSpec, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be a real number ≥ 1, got {p}")));
    }
    let ceiling = 1.0 + spec.moment_sup();
    if p >= ceiling {
        return Err(Error::Domain(format!(
            "p = {p} is outside the p-domain [1, {ceiling}) of {spec}"
        )));
    }
    if ceiling.is_finite() && ceiling - p < CEILING_MARGIN {
        return Err(Error::Domain(format!(
            "p = {p} is within {CEILING_MARGIN} of the moment ceiling {ceiling}; choose a smaller p"
        )));
    }
    Ok(())
}

/// Half-integrals in family coordinates at `u`.
struct Halves {
    right: QuadResult,
    left: QuadResult,
}

impl Halves {
    fn difference(&self) -> f64 {
        self.right.value - self.left.value
    }

    fn error(&self) -> f64 {
        self.right.abs_error_estimate + self.left.abs_error_estimate
    }

    fn scale(&self) -> f64 {
        self.right.value.abs() + self.left.value.abs()
    }
}

fn weighted(weight: Weight, p: f64, y: f64, log_f: f64) -> f64 {
    // y ≤ 0 only arises from rounding at the integration end
    if log_f == f64::NEG_INFINITY || !(y > 0.0) {
        return 0.0;
    }
    let lw = if p == 1.0 { 0.0 } else { (p - 1.0) * y.ln() };
    match weight {
        Weight::Power => (lw + log_f).exp(),
        Weight::PowerLog => {
            let l = y.ln();
            if l == 0.0 {
                0.0
            } else {
                l.signum() * (lw + l.abs().ln() + log_f).exp()
            }
        }
    }
}

/// Tail cutoff `Y` with a certified bound on `∫_Y^∞ w(y) f(u + y) dy`.
fn certified_cutoff(fam: &Family, u: f64, p: f64, weight: Weight, target: f64, spread: f64) -> Result<Option<TailCutoff>> {
    let env = match fam.tail_envelope() {
        Some(e) => e,
        None => return Ok(None),
    };
    let kappa = env.exponent - p;
    if kappa <= 0.0 {
        return Err(Error::Domain(format!("p = {p} leaves no integrable tail")));
    }
    debug_assert!(u >= env.origin);
    let c = env.coef;
    let bound = |y: f64| match weight {
        Weight::Power => c * y.powf(-kappa) / kappa,
        Weight::PowerLog => c * y.powf(-kappa) * (kappa * y.ln() + 1.0) / (kappa * kappa),
    };
    let target = target.max(1e-300);
    let cap = 1e300;
    let mut y = (c / (kappa * target)).powf(1.0 / kappa);
    if weight == Weight::PowerLog {
        for _ in 0..8 {
            let yy = y.clamp(std::f64::consts::E, cap);
            y = (c * (kappa * yy.ln() + 1.0) / (kappa * kappa * target)).powf(1.0 / kappa);
        }
    }
    let y = y.clamp(spread.max(std::f64::consts::E), cap);
    Ok(Some(TailCutoff {
        x_hi: y,
        tail_bound: bound(y),
    }))
}

fn half_integrals(spec: &DistributionSpec, u: f64, p: f64, weight: Weight, rel: f64) -> Result<Halves> {
    let fam = spec.family();
    let spread = spec.base_spread();
    let (lo, hi) = fam.support();
    let bps = fam.breakpoints();
    // Scale for the absolute part of the tolerance: `w(spread)·P(X > u + spread)`,
    // and at least `w(spread)·max(F(u), 1 − F(u))`. Both halves enter a
    // difference, so a half far smaller than the other is not chased below
    // the accuracy of the larger one.
    let ws = spread.powf(p - 1.0);
    let core = ws * fam.cdf(u).max(fam.sf(u));
    let floor_right = (ws * fam.sf(u + spread)).max(core);
    let floor_left = (ws * fam.cdf(u - spread)).max(core);
    let tol_for = |floor: f64| Tolerance::new(rel, (1e-3 * rel * floor).max(1e-300));

    // Support ends are null sets; nodes rounded onto them are dropped.
    let log_f = |x: f64| if x > lo && x < hi { fam.log_pdf(x) } else { f64::NEG_INFINITY };

    // right: y ∈ (0, ∞) when unbounded above, otherwise x ∈ (u, hi)
    let right = {
        let tol = tol_for(floor_right);
        if hi.is_infinite() {
            let g = |y: f64| weighted(weight, p, y, log_f(u + y));
            let integrand = Integrand::new(&g, 0.0, f64::INFINITY)
                .singular_lower(true)
                .breakpoints(bps.iter().map(|b| b - u))
                .tail_width(spread);
            match certified_cutoff(fam, u, p, weight, 0.25 * tol.rel * floor_right, spread)? {
                Some(cut) => integrate_tail_truncated(&integrand, cut, tol)?,
                None => integrate(&integrand, tol)?,
            }
        } else if hi > u {
            // near side in x, far side in the distance z = hi − x to the end
            let m = u + 0.5 * (hi - u);
            let g = |x: f64| weighted(weight, p, x - u, log_f(x));
            let near = Integrand::new(&g, u, m)
                .singular_lower(true)
                .breakpoints(bps.iter().copied());
            let h = |z: f64| {
                let lf = if z > 0.0 { fam.log_pdf_below_upper(z) } else { f64::NEG_INFINITY };
                weighted(weight, p, (hi - u) - z, lf)
            };
            let far = Integrand::new(&h, 0.0, hi - m)
                .singular_lower(true)
                .breakpoints(bps.iter().map(|b| hi - b));
            let half_tol = Tolerance::new(tol.rel, 0.5 * tol.abs);
            let (a, b) = (integrate(&near, half_tol)?, integrate(&far, half_tol)?);
            QuadResult {
                value: a.value + b.value,
                abs_error_estimate: a.abs_error_estimate + b.abs_error_estimate,
                evaluations: a.evaluations + b.evaluations,
            }
        } else {
            QuadResult {
                value: 0.0,
                abs_error_estimate: 0.0,
                evaluations: 0,
            }
        }
    };

    // left: in x-coordinates when the support is bounded below, so the
    // support end is an exact integration limit.
    let left = {
        let tol = tol_for(floor_left);
        if lo.is_finite() {
            let g = |x: f64| weighted(weight, p, u - x, log_f(x));
            if u > lo {
                let integrand = Integrand::new(&g, lo, u)
                    .singular_lower(true)
                    .singular_upper(true)
                    .breakpoints(bps.iter().copied());
                integrate(&integrand, tol)?
            } else {
                QuadResult {
                    value: 0.0,
                    abs_error_estimate: 0.0,
                    evaluations: 0,
                }
            }
        } else {
            let g = |y: f64| weighted(weight, p, y, log_f(u - y));
            let integrand = Integrand::new(&g, 0.0, f64::INFINITY)
                .singular_lower(true)
                .breakpoints(bps.iter().map(|b| u - b))
                .tail_width(spread);
            integrate(&integrand, tol)?
        }
    };
    Ok(Halves { right, left })
}

/// `Φ(a, p)` in the spec's coordinates.
pub fn balance(spec: &DistributionSpec, a: f64, p: f64) -> Result<f64> {
    check_p(spec, p)?;
    if p == 1.0 {
        return Ok(spec.sf(a) - spec.cdf(a));
    }
    let h = half_integrals(spec, spec.to_base(a), p, Weight::Power, 1e-12)?;
    Ok(spec.orientation() * spec.scale().powf(p - 1.0) * h.difference())
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target relative accuracy of the root.
    pub tol: f64,
    /// Warm start: a centre and radius (spec coordinates) for the first bracket.
    pub hint: Option<(f64, f64)>,
    /// Whether to evaluate the derivative-sign integral at the root.
    pub with_sign: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            hint: None,
            with_sign: true,
        }
    }
}

/// Solves for `ν_p` with default options, including the derivative sign.
pub fn solve_pmean(spec: &DistributionSpec, p: f64, tol: f64) -> Result<PMeanPoint> {
    solve_pmean_with(
        spec,
        p,
        SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
}

fn clamp_interior(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo {
        lo + (hi.min(lo + 1.0) - lo) * 1e-9
    } else if x >= hi {
        hi - (hi - lo.max(hi - 1.0)) * 1e-9
    } else {
        x
    }
}

/// Left median: smallest `a` with `F(a) ≥ 1/2`.
fn left_median(spec: &DistributionSpec) -> (f64, bool) {
    let sup = spec.support();
    let guess = spec.median();
    let w = spec.spread();
    let mut lo = guess - w;
    let mut hi = guess + w;
    let mut step = w;
    while spec.cdf(lo) >= 0.5 && lo > sup.lower {
        step *= 2.0;
        lo = (guess - step).max(sup.lower);
    }
    step = w;
    while spec.cdf(hi) < 0.5 && hi < sup.upper {
        step *= 2.0;
        hi = (guess + step).min(sup.upper);
    }
    let m = bisect_predicate(|x| spec.cdf(x) >= 0.5, lo, hi, 0.0);
    let probe = 1e-7 * w.max(m.abs() * 1e-3);
    let flat = (spec.cdf(m + probe) - 0.5).abs() <= 1e-14;
    (m, flat)
}

/// Solves for `ν_p` from a bracket, then optionally classifies `dν/dp`.
pub fn solve_pmean_with(spec: &DistributionSpec, p: f64, opts: SolveOptions) -> Result<PMeanPoint> {
    check_p(spec, p)?;
    let c = spec.scale();
    let sigma = spec.orientation();
    let tol = opts.tol.max(1e-15);

    if p == 1.0 {
        let (nu, flat_median) = left_median(spec);
        let residual = spec.sf(nu) - spec.cdf(nu);
        let mut point = PMeanPoint {
            p,
            nu,
            balance_residual: residual,
            balance_scale: 1.0,
            nu_error: 4.0 * f64::EPSILON * nu.abs().max(spec.spread()),
            dnu_sign: DnuSign::Unknown,
            dnu_dp: None,
            sign_integral: None,
            flat_median,
        };
        if opts.with_sign {
            attach_sign(spec, &mut point)?;
        }
        return Ok(point);
    }

    // Work in family coordinates where Φ is decreasing in u.
    let fam = spec.family();
    let (lo_s, hi_s) = fam.support();
    let w = spec.base_spread();
    let phi = |u: f64, rel: f64| -> Result<(f64, f64, f64)> {
        let h = half_integrals(spec, u, p, Weight::Power, rel)?;
        Ok((h.difference(), h.error(), h.scale()))
    };

    let coarse = 1e-8;
    let (mut a, mut b) = match opts.hint {
        Some((centre, radius)) => {
            let (x0, x1) = (spec.to_base(centre - radius), spec.to_base(centre + radius));
            (x0.min(x1), x0.max(x1))
        }
        None => (
            crate::dist::base_quantile(fam, 0.01),
            crate::dist::base_quantile(fam, 0.99),
        ),
    };
    a = clamp_interior(a, lo_s, hi_s);
    b = clamp_interior(b, lo_s, hi_s);
    if !(a < b) {
        a = clamp_interior(a - w, lo_s, hi_s);
        b = clamp_interior(b + w, lo_s, hi_s);
    }
    let mut fa = phi(a, coarse)?.0;
    let mut fb = phi(b, coarse)?.0;
    let mut expansions = 0;
    while fa < 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Bracket(format!("no sign change below u = {a} for {spec} at p = {p}")));
        }
        b = a;
        fb = fa;
        a = if lo_s.is_finite() {
            lo_s + 0.25 * (a - lo_s)
        } else {
            a - w * 2f64.powi(expansions)
        };
        fa = phi(a, coarse)?.0;
    }
    expansions = 0;
    while fb > 0.0 {
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Bracket(format!("no sign change above u = {b} for {spec} at p = {p}")));
        }
        a = b;
        b = if hi_s.is_finite() {
            hi_s - 0.25 * (hi_s - b)
        } else {
            b + w * 2f64.powi(expansions)
        };
        fb = phi(b, coarse)?.0;
    }

    // Polish at full accuracy.
    let fine = (0.01 * tol).clamp(1e-13, 1e-8);
    fa = phi(a, fine)?.0;
    fb = phi(b, fine)?.0;
    if fa.signum() == fb.signum() {
        // the coarse root sits within fine noise of an end of the bracket
        if fa.abs() < fb.abs() {
            b = a;
            fb = fa;
        } else {
            a = b;
            fa = fb;
        }
    }
    let xtol = 0.01 * tol * w.max(1e-300);
    let mut last_err = 0.0;
    let mut last_scale = 0.0;
    let root = brent(
        |u| {
            let (v, e, s) = phi(u, fine)?;
            last_err = e;
            last_scale = s;
            // Inside the quadrature noise the sign is meaningless; stop there.
            if v.abs() <= e {
                Ok(0.0)
            } else {
                Ok(v)
            }
        },
        a,
        b,
        fa,
        fb,
        xtol,
        0.0,
        200,
    )?;
    let (res, err, scale) = phi(root.x, fine)?;
    last_err = last_err.max(err);
    last_scale = scale.max(last_scale);
    // local slope of Φ by a symmetric difference around the root
    let h = (root.hi - root.lo).max(1e-6 * w).min(1e-3 * w);
    let (f_lo, _, _) = phi(clamp_interior(root.x - h, lo_s, hi_s), fine)?;
    let (f_hi, _, _) = phi(clamp_interior(root.x + h, lo_s, hi_s), fine)?;
    let slope = ((f_lo - f_hi) / (2.0 * h)).abs();
    // a zero from the noise stop leaves Brent's far bracket end stale
    let width = if root.fx == 0.0 { xtol } else { root.hi - root.lo };
    let nu_err_base = if slope > 0.0 { width.max(last_err / slope) } else { width };

    let cp = c.powf(p - 1.0);
    let mut point = PMeanPoint {
        p,
        nu: spec.from_base(root.x),
        balance_residual: sigma * cp * res,
        balance_scale: cp * last_scale,
        nu_error: c * nu_err_base.max(2.0 * f64::EPSILON * root.x.abs()),
        dnu_sign: DnuSign::Unknown,
        dnu_dp: None,
        sign_integral: None,
        flat_median: false,
    };
    if opts.with_sign {
        attach_sign(spec, &mut point)?;
    }
    Ok(point)
}

fn attach_sign(spec: &DistributionSpec, point: &mut PMeanPoint) -> Result<()> {
    let s = sign_integral_at(spec, point.p, point.nu, point.nu_error)?;
    point.dnu_sign = s.sign;
    point.sign_integral = Some(s.difference);
    if point.dnu_dp.is_none() {
        point.dnu_dp = s.dnu_dp;
    }
    Ok(())
}

/// Evaluates the derivative-sign integral at a known `ν_p` with uncertainty `nu_error`.
pub fn sign_integral_at(spec: &DistributionSpec, p: f64, nu: f64, nu_error: f64) -> Result<SignIntegral> {
    check_p(spec, p)?;
    let c = spec.scale();
    let sigma = spec.orientation();
    let u = spec.to_base(nu);
    let rel = 1e-11;
    let h = half_integrals(spec, u, p, Weight::PowerLog, rel)?;
    let d = h.difference();
    let mut uncertainty = 10.0 * h.error();
    if d.abs() <= 1e-6 * h.scale() + uncertainty {
        // Sensitivity of the integral to the uncertainty in ν.
        let du = (nu_error / c).max(4.0 * f64::EPSILON * u.abs().max(spec.base_spread()));
        let plus = half_integrals(spec, u + du, p, Weight::PowerLog, rel)?;
        let minus = half_integrals(spec, u - du, p, Weight::PowerLog, rel)?;
        uncertainty += 0.5 * (plus.difference() - minus.difference()).abs() + 10.0 * (plus.error() + minus.error());
    }
    let sign = if d.abs() <= uncertainty {
        DnuSign::Flat
    } else if sigma * d > 0.0 {
        DnuSign::Increasing
    } else {
        DnuSign::Decreasing
    };
    let scale_factor = c.powf(p - 1.0);
    let dnu_dp = if p == 1.0 {
        let f = spec.family().pdf(u);
        (f > 0.0 && f.is_finite()).then(|| sigma * c * d / (2.0 * f))
    } else {
        None
    };
    Ok(SignIntegral {
        sign,
        difference: sigma * scale_factor * d,
        uncertainty: scale_factor * uncertainty,
        dnu_dp,
    })
}

/// Solves for `ν_p` and returns the sign of `dν/dp` there.
pub fn dnu_sign(spec: &DistributionSpec, p: f64) -> Result<DnuSign> {
    Ok(solve_pmean(spec, p, 1e-10)?.dnu_sign)
}
