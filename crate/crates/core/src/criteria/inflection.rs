use serde::{Deserialize, Serialize};

use super::{crossing_profile, Conclusion, Evidence, Grade, SkewVerdict};
use crate::dist::{DistributionSpec, Family};
use crate::error::Result;
use crate::pmean::solve_pmean;

const CRITERION: &str = "inflection_points";
const GRID: usize = 2000;

/// Optional weakenings of the two-inflection criterion, all based on the
/// crossing point `c₁` at `p = 1`. Off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relaxations {
    /// Replace `ν₁ > (ν₀+θ₂)/2` with `ν₁ + c₁ > θ₂`.
    pub median_via_crossing: bool,
    /// Replace `ν₀` in both log-derivative bounds with `ν₁ − c₁`.
    pub mode_via_crossing: bool,
    /// Check the upper bound only on `(ν₁ + c₁, ∞)` instead of `(θ₂, ∞)`.
    pub upper_from_crossing: bool,
}

impl Relaxations {
    fn any(&self) -> bool {
        self.median_via_crossing || self.mode_via_crossing || self.upper_from_crossing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflectionPath {
    /// Two positive inflection points around the mode.
    TwoInflections,
    /// One positive inflection point to the right of the mode.
    OneInflection,
    Inapplicable,
}

/// Quantities behind the inflection criterion. Coordinates are those of the
/// spec (mirrored for left-bounded-above supports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflectionReport {
    pub path: InflectionPath,
    /// Positive inflection points, ascending.
    pub inflections: Vec<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub mode: Option<f64>,
    pub median: Option<f64>,
    /// `f′/f > 1/ν₀` on `(0, θ₁)`.
    pub lower_bound_check: bool,
    /// `f′/f > −1/ν₀` on `(θ₂, ∞)`.
    pub upper_bound_check: bool,
    /// `ν₁ > (ν₀+θ₂)/2`, or its relaxed form.
    pub median_condition: bool,
    /// Smallest sampled `f′/f` on the lower interval, with its bound.
    pub lower_min: Option<(f64, f64)>,
    /// Smallest sampled `f′/f` on the upper interval, with its bound.
    pub upper_min: Option<(f64, f64)>,
    /// Limit of `f′/f` at infinity when known in closed form.
    pub tail_limit: Option<f64>,
    pub c1: Option<f64>,
    pub reason: Option<String>,
}

impl InflectionReport {
    fn inapplicable(reason: impl Into<String>) -> Self {
        Self {
            path: InflectionPath::Inapplicable,
            inflections: Vec::new(),
            theta1: None,
            theta2: None,
            mode: None,
            median: None,
            lower_bound_check: false,
            upper_bound_check: false,
            median_condition: false,
            lower_min: None,
            upper_min: None,
            tail_limit: None,
            c1: None,
            reason: Some(reason.into()),
        }
    }
}

/// `lim f′/f` at `+∞` in the spec's coordinates, for unreflected families
/// where it is known.
fn tail_limit(spec: &DistributionSpec) -> Option<f64> {
    let base = match spec.family() {
        Family::Levy { .. } | Family::LogLogistic { .. } | Family::Pareto { .. } => 0.0,
        Family::ChiSquared { .. } => -0.5,
        Family::Gamma { scale, .. } => -1.0 / scale,
        Family::Exponential { rate } => -rate,
        Family::Weibull { k, lambda } => {
            if *k < 1.0 {
                0.0
            } else if *k == 1.0 {
                -1.0 / lambda
            } else {
                f64::NEG_INFINITY
            }
        }
        _ => return None,
    };
    Some(base / spec.scale())
}

/// Minimum of `f′/f` over a grid on `(a, b)` graded towards `a` (and
/// geometric out to `b` when it is far away).
fn min_log_slope(spec: &DistributionSpec, a: f64, b: f64) -> Result<(f64, Vec<f64>)> {
    let w = b - a;
    let mut xs = Vec::with_capacity(GRID);
    let half = GRID / 2;
    for i in 0..half {
        xs.push(a + w * 1e-10f64.powf(1.0 - i as f64 / half as f64));
    }
    for i in 0..half {
        xs.push(a + w * (i as f64 + 0.5) / half as f64);
    }
    xs.retain(|x| *x > a && *x < b);
    xs.sort_by(f64::total_cmp);
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(spec.log_pdf_derivative(x)?);
    }
    let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((m, vals))
}

/// Inflection-point criterion for densities on a half-line `(L, ∞)`.
///
/// With two inflection points `θ₁ < ν₀ < θ₂` it checks the log-derivative
/// bounds on `(L, θ₁)` and `(θ₂, ∞)` on a 2000-point graded grid plus the
/// tail limit, and the median condition; a pass is numeric grade. With one
/// inflection point `θ > ν₀` only the median condition is needed. The
/// verdict is absent when neither shape applies.
pub fn inflection_criterion(spec: &DistributionSpec, relax: Relaxations) -> Result<(InflectionReport, Option<SkewVerdict>)> {
    let sup = spec.support();
    let (work, mirrored) = if sup.lower.is_finite() && sup.upper.is_infinite() {
        (spec.clone(), false)
    } else if sup.lower.is_infinite() && sup.upper.is_finite() {
        (spec.affine(-1.0, 0.0)?, true)
    } else {
        return Ok((InflectionReport::inapplicable("support is not a half-line"), None));
    };
    let back = |x: f64| if mirrored { -x } else { x };
    let lo = work.support().lower;
    let positive = if mirrored { Conclusion::TrulyNegative } else { Conclusion::TrulyPositive };

    let Some(nu0) = work.mode() else {
        return Ok((InflectionReport::inapplicable("density has no interior mode"), None));
    };
    let closed = work.family().inflections_closed().is_some() && !work.is_reflected();
    let infl: Vec<f64> = work.inflection_points().into_iter().filter(|x| *x > lo).collect();
    let nu1 = solve_pmean(&work, 1.0, 1e-10)?.nu;
    let mut report = InflectionReport {
        path: InflectionPath::Inapplicable,
        inflections: infl.iter().map(|x| back(*x)).collect(),
        theta1: None,
        theta2: None,
        mode: Some(back(nu0)),
        median: Some(back(nu1)),
        lower_bound_check: false,
        upper_bound_check: false,
        median_condition: false,
        lower_min: None,
        upper_min: None,
        tail_limit: None,
        c1: None,
        reason: None,
    };
    let scope = |s: &str| if mirrored { format!("{s} (mirrored)") } else { s.to_string() };

    match infl.as_slice() {
        [theta] if *theta > nu0 => {
            report.path = InflectionPath::OneInflection;
            report.theta2 = Some(back(*theta));
            let mid = 0.5 * (nu0 + theta);
            report.median_condition = nu1 > mid;
            report.lower_bound_check = true;
            report.upper_bound_check = true;
            let ev = Evidence::new(CRITERION, scope("one inflection point right of the mode; median condition"), report.median_condition)
                .with("nu0", back(nu0))
                .with("theta", back(*theta))
                .with("nu1", back(nu1))
                .with("midpoint", back(mid));
            let v = if report.median_condition {
                let grade = if closed { Grade::Analytic } else { Grade::Numeric };
                let mut v = SkewVerdict::new(spec, positive, Some(grade));
                v.evidence.push(ev);
                v
            } else {
                SkewVerdict::indeterminate(spec, vec![ev])
            };
            Ok((report, Some(v)))
        }
        [t1, t2] if *t1 < nu0 && nu0 < *t2 => {
            report.path = InflectionPath::TwoInflections;
            report.theta1 = Some(back(*t1));
            report.theta2 = Some(back(*t2));
            let c1 = if relax.any() { crossing_profile(&work, 1.0)?.c_p } else { None };
            report.c1 = c1;
            if relax.any() && c1.is_none() {
                report.reason = Some("relaxations need the crossing point c₁, which was not found".into());
                return Ok((report, None));
            }
            let c1v = c1.unwrap_or(f64::NAN);
            let anchor = if relax.mode_via_crossing { nu1 - c1v - lo } else { nu0 - lo };
            if !(anchor > 0.0) {
                report.reason = Some("reference point for the bounds is not inside the support".into());
                return Ok((report, None));
            }
            let (lower_min, _) = min_log_slope(&work, lo, *t1)?;
            let lower_bound = 1.0 / anchor;
            report.lower_min = Some((back_slope(lower_min, mirrored), lower_bound));
            report.lower_bound_check = lower_min > lower_bound;

            let upper_start = if relax.upper_from_crossing { nu1 + c1v } else { *t2 };
            let far = work.quantile(1.0 - 1e-12).max(upper_start + work.spread());
            let (upper_grid_min, vals) = min_log_slope(&work, upper_start, far)?;
            let upper_bound = -1.0 / anchor;
            let limit = tail_limit(&work);
            report.tail_limit = limit.map(|l| back_slope(l, mirrored));
            let tail_ok = match limit {
                Some(l) => l > upper_bound,
                // without a known limit, accept a tail that is still rising at the grid end
                None => vals.windows(2).rev().take(20).all(|w| w[1] >= w[0]),
            };
            report.upper_min = Some((back_slope(upper_grid_min, mirrored), upper_bound));
            report.upper_bound_check = upper_grid_min > upper_bound && tail_ok;

            report.median_condition = if relax.median_via_crossing {
                nu1 + c1v > *t2
            } else {
                nu1 > 0.5 * (nu0 + t2)
            };

            let evidence = vec![
                Evidence::new(CRITERION, scope("f'/f > 1/nu0 on (L, theta1)"), report.lower_bound_check)
                    .with("min", lower_min)
                    .with("bound", lower_bound),
                Evidence::new(CRITERION, scope("f'/f > -1/nu0 on (theta2, inf)"), report.upper_bound_check)
                    .with("min", upper_grid_min)
                    .with("bound", upper_bound)
                    .with("tail_limit", limit.unwrap_or(f64::NAN)),
                Evidence::new(CRITERION, scope("nu1 > (nu0 + theta2)/2"), report.median_condition)
                    .with("nu0", back(nu0))
                    .with("nu1", back(nu1))
                    .with("theta1", back(*t1))
                    .with("theta2", back(*t2)),
            ];
            let v = if report.lower_bound_check && report.upper_bound_check && report.median_condition {
                let mut v = SkewVerdict::new(spec, positive, Some(Grade::Numeric));
                v.evidence = evidence;
                v
            } else {
                SkewVerdict::indeterminate(spec, evidence)
            };
            Ok((report, Some(v)))
        }
        other => {
            report.reason = Some(format!(
                "{} positive inflection point(s) not in the shape the criterion needs",
                other.len()
            ));
            Ok((report, None))
        }
    }
}

fn back_slope(v: f64, mirrored: bool) -> f64 {
    if mirrored {
        -v
    } else {
        v
    }
}
