use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::Result;
use crate::pmean::solve_pmean;

/// Sign changes of `h(x) = f(ν+x) − f(ν−x)` around a solved p-mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingProfile {
    pub p: f64,
    pub nu: f64,
    /// First crossing `inf{x > 0 : f(ν+x) > f(ν−x)}`, refined by bisection.
    pub c_p: Option<f64>,
    pub crossing_count: usize,
    /// Single crossing from below, on a support no longer to the left of `ν`
    /// than to the right.
    pub satisfies_l2: bool,
    /// `f(ν−c_p) − f(ν+c_p)`.
    pub residual_at_crossing: Option<f64>,
    /// `f(ν)`, the scale for the residual.
    pub density_at_nu: f64,
    /// Maximiser of `log f(ν−x) − log f(ν+x)` on `(0, c_p)`.
    pub ratio_peak: Option<f64>,
}

/// Relative size below which the two log densities count as equal.
const TIE: f64 = 1e-12;

fn sign_of(spec: &DistributionSpec, nu: f64, x: f64) -> i8 {
    let r = spec.log_pdf(nu + x);
    let l = spec.log_pdf(nu - x);
    if r == f64::NEG_INFINITY && l == f64::NEG_INFINITY {
        return 0;
    }
    let d = r - l;
    if d.is_nan() || d.abs() <= TIE * (1.0 + r.abs().min(l.abs())) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

/// Sample points on `(0, reach)`: geometric near zero, uniform in the bulk,
/// and geometric towards a finite end.
fn crossing_grid(reach: f64, bulk: f64, finite_end: bool) -> Vec<f64> {
    let mut pts = Vec::with_capacity(520);
    let inner = bulk.min(0.25 * reach);
    let start = 1e-9 * inner;
    for i in 0..128 {
        pts.push(start * (inner / start).powf(i as f64 / 128.0));
    }
    let lin_end = if finite_end { reach - (reach - inner) * 1e-3 } else { reach };
    if lin_end > inner {
        for i in 0..256 {
            pts.push(inner + (lin_end - inner) * i as f64 / 256.0);
        }
    }
    if finite_end {
        let gap0 = reach - lin_end.max(inner);
        if gap0 > 0.0 {
            for i in 0..128 {
                let gap = gap0 * (1e-9f64).powf(i as f64 / 127.0);
                pts.push(reach - gap);
            }
        }
    } else {
        pts.push(reach);
    }
    pts.retain(|x| *x > 0.0 && *x <= reach);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Locates sign changes of `f(ν_p+x) − f(ν_p−x)` for `x` in
/// `(0, min(ν−L, R−ν))` on a 512-point graded grid, then bisects the first.
pub fn crossing_profile(spec: &DistributionSpec, p: f64) -> Result<CrossingProfile> {
    let nu = solve_pmean(spec, p, 1e-10)?.nu;
    let sup = spec.support();
    let (left, right) = (nu - sup.lower, sup.upper - nu);
    let finite_end = left.min(right).is_finite();
    let spread = spec.spread();
    let reach = if finite_end {
        left.min(right)
    } else {
        // both tails beyond the 1e-13 quantiles carry no density worth comparing
        (nu - spec.quantile(1e-13)).max(spec.quantile(1.0 - 1e-13) - nu).max(spread)
    };
    let grid = crossing_grid(reach, spread, finite_end);

    let mut count = 0;
    let mut last: Option<(i8, f64)> = None;
    let mut first_sign = 0i8;
    let mut first_change: Option<(f64, f64)> = None;
    for &x in &grid {
        let s = sign_of(spec, nu, x);
        if s == 0 {
            continue;
        }
        if first_sign == 0 {
            first_sign = s;
        }
        if let Some((prev, px)) = last {
            if prev != s {
                count += 1;
                if first_change.is_none() {
                    first_change = Some((px, x));
                }
            }
        }
        last = Some((s, x));
    }

    let c_p = first_change.map(|(mut a, mut b)| {
        let sa = sign_of(spec, nu, a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let s = sign_of(spec, nu, m);
            if s == 0 {
                return m;
            }
            if s == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    });
    let ratio = |x: f64| spec.log_pdf(nu - x) - spec.log_pdf(nu + x);
    let ratio_peak = c_p.and_then(|c| {
        let inside: Vec<f64> = grid.iter().copied().filter(|x| *x < c).collect();
        let best = (0..inside.len()).max_by(|&i, &j| ratio(inside[i]).total_cmp(&ratio(inside[j])))?;
        let a = if best == 0 { 0.0 } else { inside[best - 1] };
        let b = inside.get(best + 1).copied().unwrap_or(c);
        Some(golden_max(ratio, a, b))
    });
    let support_ok = left <= right || (sup.lower.is_infinite() && sup.upper.is_infinite());
    let satisfies_l2 = count == 1 && first_sign < 0 && support_ok;
    let residual_at_crossing = c_p.map(|c| spec.pdf(nu - c) - spec.pdf(nu + c));
    Ok(CrossingProfile {
        p,
        nu,
        c_p,
        crossing_count: count,
        satisfies_l2,
        residual_at_crossing,
        density_at_nu: spec.pdf(nu),
        ratio_peak,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}
