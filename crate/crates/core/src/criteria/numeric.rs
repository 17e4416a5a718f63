use super::{fmt_range, Conclusion, Evidence, Grade, SkewVerdict, Witness};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::pmean::{sign_integral_at, trace_curve, DnuSign, PDomain};

const CRITERION: &str = "numeric_curve";

/// Smallest admitted certification grid, counting the mode point `p = 0`
/// when the mode is unique.
pub const MIN_CERTIFY_POINTS: usize = 12;

/// Largest p used by default grids on light-tailed laws.
const DEFAULT_P_MAX: f64 = 6.0;

/// Evenly spaced grid on `[1, min(hi − 0.05, 6)]` with step at most 0.5 and
/// at least 12 points.
pub fn default_certify_grid(spec: &DistributionSpec) -> Result<Vec<f64>> {
    let top = PDomain::for_spec(spec).default_cap().min(DEFAULT_P_MAX);
    if !(top > 1.0) {
        return Err(Error::Domain(format!(
            "{} has no room for a p grid above 1",
            spec.describe()
        )));
    }
    let n = (((top - 1.0) / 0.5).ceil() as usize + 1).max(MIN_CERTIFY_POINTS);
    Ok((0..n).map(|i| 1.0 + (top - 1.0) * i as f64 / (n - 1) as f64).collect())
}

/// Certifies true skewness from a traced curve: every point must carry a
/// certified derivative sign and every step must exceed
/// `max(min_slope·Δp, 10·tolerance)`, with `ν` at the smallest grid p on the
/// correct side of the mode. Symmetric when the whole curve is constant.
/// A median below the mode, or a certified decrease, refutes true positive
/// skewness.
pub fn numeric_certify(spec: &DistributionSpec, grid: &[f64], min_slope: f64) -> Result<SkewVerdict> {
    let mode = spec.mode();
    let nu0 = mode.or(spec.analytic_facts().boundary_mode);
    let counted = grid.len() + usize::from(nu0.is_some());
    if counted < MIN_CERTIFY_POINTS {
        return Err(Error::Precondition(format!(
            "certification needs at least {MIN_CERTIFY_POINTS} grid points, got {counted}"
        )));
    }
    if grid.first() != Some(&1.0) {
        return Err(Error::Precondition("certification grid must start at p = 1".into()));
    }
    let curve = trace_curve(spec, grid)?;
    let scope = fmt_range(grid);
    if !curve.failures.is_empty() {
        let ev = Evidence::new(CRITERION, scope, false)
            .with("failed_points", curve.failures.len() as f64)
            .note(format!("first failure at p = {}: {}", curve.failures[0].0, curve.failures[0].1));
        return Ok(SkewVerdict::indeterminate(spec, vec![ev]));
    }
    let pts = &curve.points;
    let spread = spec.spread();
    let noise = pts.iter().map(|q| q.nu_error).fold(1e-10 * spread, f64::max);
    let step_floor = 10.0 * noise;
    let first = &pts[0];
    let nu1 = first.nu;

    let mut min_step = f64::INFINITY;
    let mut max_step = f64::NEG_INFINITY;
    let (mut inc, mut dec) = (true, true);
    for w in pts.windows(2) {
        let step = w[1].nu - w[0].nu;
        let need = (min_slope * (w[1].p - w[0].p)).max(step_floor);
        min_step = min_step.min(step);
        max_step = max_step.max(step);
        inc &= step > need;
        dec &= -step > need;
    }
    inc &= pts.iter().all(|q| q.dnu_sign == DnuSign::Increasing);
    dec &= pts.iter().all(|q| q.dnu_sign == DnuSign::Decreasing);
    let spread_of_nu = pts.iter().map(|q| (q.nu - nu1).abs()).fold(0.0, f64::max);
    let symmetric = spread_of_nu <= 1e-8 * spread.max(1.0);

    let mut curve_ev = Evidence::new(CRITERION, scope.clone(), inc || dec || symmetric)
        .with("min_step", min_step)
        .with("max_step", max_step)
        .with("step_floor", step_floor)
        .with("nu_first", nu1)
        .with("nu_last", pts[pts.len() - 1].nu);
    curve_ev = curve_ev.note(if inc {
        "strictly increasing"
    } else if dec {
        "strictly decreasing"
    } else if symmetric {
        "constant"
    } else {
        "not monotone beyond tolerance"
    });

    if symmetric {
        let mut v = SkewVerdict::new(spec, Conclusion::Symmetric, Some(Grade::Numeric));
        v.evidence.push(curve_ev.with("max_deviation", spread_of_nu));
        return Ok(v);
    }

    let mode_ev = |pass: bool, scope: &str| {
        let mut e = Evidence::new("mode_comparison", scope.to_string(), pass).with("nu_first", nu1);
        if let Some(m) = nu0 {
            e = e.with("nu0", m);
        }
        e
    };
    // On a half-line with all moments finite, ν_p runs off to the open end,
    // so the curve cannot be monotone the other way on the whole domain.
    let sup = spec.support();
    let light = spec.moment_sup().is_infinite();
    let inc_possible = !(light && sup.lower.is_infinite() && sup.upper.is_finite());
    let dec_possible = !(light && sup.lower.is_finite() && sup.upper.is_infinite());

    if inc && inc_possible && nu0.is_none_or(|m| nu1 > m + step_floor) {
        let mut v = SkewVerdict::new(spec, Conclusion::TrulyPositive, Some(Grade::Numeric));
        let mut ev = mode_ev(true, "nu at smallest p exceeds mode");
        if nu0.is_none() {
            ev.note = Some("no unique mode; comparison vacuous".into());
        }
        v.evidence.push(curve_ev);
        v.evidence.push(ev);
        return Ok(v);
    }
    if dec && dec_possible {
        let below = nu0.is_none_or(|m| nu1 < m - step_floor);
        if below {
            let mut v = SkewVerdict::new(spec, Conclusion::TrulyNegative, Some(Grade::Numeric));
            v.evidence.push(curve_ev);
            v.evidence.push(mode_ev(true, "nu at smallest p is below mode"));
            return Ok(v);
        }
    }

    // refutations with robust witnesses only
    if let Some(m) = nu0 {
        if nu1 < m - step_floor {
            let mut v = SkewVerdict::new(spec, Conclusion::NotTrulyPositive, Some(Grade::Refuted));
            v.evidence.push(curve_ev);
            v.evidence.push(mode_ev(false, "nu at smallest p exceeds mode"));
            v.witness = Some(Witness::MedianBelowMode { nu0: m, nu1 });
            return Ok(v);
        }
    }
    if let Some(q) = pts.iter().find(|q| q.dnu_sign == DnuSign::Decreasing) {
        let s = sign_integral_at(spec, q.p, q.nu, q.nu_error)?;
        if s.sign == DnuSign::Decreasing {
            let mut v = SkewVerdict::new(spec, Conclusion::NotTrulyPositive, Some(Grade::Refuted));
            v.evidence.push(curve_ev);
            v.evidence.push(
                Evidence::new("derivative_sign", format!("p = {}", q.p), false)
                    .with("difference", s.difference)
                    .with("uncertainty", s.uncertainty),
            );
            v.witness = Some(Witness::Decrease {
                p: q.p,
                difference: s.difference,
                uncertainty: s.uncertainty,
            });
            return Ok(v);
        }
    }
    let mut evidence = vec![curve_ev];
    if inc {
        evidence.push(mode_ev(false, "nu at smallest p exceeds mode"));
    }
    Ok(SkewVerdict::indeterminate(spec, evidence))
}
