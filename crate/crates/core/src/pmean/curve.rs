use serde::{Deserialize, Serialize};

use super::{check_p, solve_pmean_with, DnuSign, PMeanPoint, SolveOptions};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};

/// The p-domain `[1, 1 + moment_sup)`, optionally extended by `p = 0`
/// standing for the mode when it is unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PDomain {
    pub lo: f64,
    pub hi: f64,
    pub include_mode: bool,
}

/// Default distance kept from a finite moment ceiling when building grids.
pub const DEFAULT_CEILING_GAP: f64 = 0.05;

impl PDomain {
    pub fn for_spec(spec: &DistributionSpec) -> Self {
        Self {
            lo: 1.0,
            hi: 1.0 + spec.moment_sup(),
            include_mode: spec.mode().or(spec.analytic_facts().boundary_mode).is_some(),
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        (p >= self.lo && p < self.hi) || (self.include_mode && p == 0.0)
    }

    /// Largest p admitted by default grids: `hi − 0.05` under a finite ceiling.
    pub fn default_cap(&self) -> f64 {
        if self.hi.is_finite() {
            self.hi - DEFAULT_CEILING_GAP
        } else {
            f64::INFINITY
        }
    }

    /// Drops grid points above the default cap; returns the kept points and
    /// a warning when anything was dropped.
    pub fn clip(&self, grid: &[f64]) -> (Vec<f64>, Option<String>) {
        let cap = self.default_cap();
        let kept: Vec<f64> = grid.iter().copied().filter(|p| *p <= cap + 1e-12 && *p >= self.lo).collect();
        let dropped = grid.len() - kept.len();
        let warning = (dropped > 0).then(|| {
            format!(
                "warning: {dropped} grid point(s) outside [{}, {cap}] removed (p-domain is [{}, {}))",
                self.lo, self.lo, self.hi
            )
        });
        (kept, warning)
    }
}

/// Evenly spaced grid `start, start+step, ...` up to `stop` inclusive.
pub fn p_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid needs start ≤ stop and a positive step, got {start}:{stop}:{step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let p = start + i as f64 * step;
            // snap accumulated rounding onto the decimal grid
            (p * 1e12).round() / 1e12
        })
        .collect())
}

/// A traced trajectory `p ↦ ν_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PMeanCurve {
    /// Mini-language form of the traced distribution.
    pub distribution: String,
    pub grid: Vec<f64>,
    pub points: Vec<PMeanPoint>,
    /// Grid points whose solve failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

impl PMeanCurve {
    pub fn solved(&self) -> impl Iterator<Item = &PMeanPoint> {
        self.points.iter().filter(|q| q.nu.is_finite())
    }

    pub fn nu_at(&self, p: f64) -> Option<f64> {
        self.points.iter().find(|q| q.p == p).map(|q| q.nu).filter(|v| v.is_finite())
    }
}

/// Solves `ν_p` along a sorted grid, warm-starting each solve from the
/// previous root. Single failures are recorded as `unknown` points; a
/// failure rate of 20% or more is an error.
pub fn trace_curve(spec: &DistributionSpec, grid: &[f64]) -> Result<PMeanCurve> {
    trace_curve_with(spec, grid, SolveOptions::default().tol)
}

/// [`trace_curve`] with a given relative root tolerance.
pub fn trace_curve_with(spec: &DistributionSpec, grid: &[f64], tol: f64) -> Result<PMeanCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty p grid".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter("p grid must be strictly increasing".into()));
        }
    }
    for &p in grid {
        check_p(spec, p)?;
    }
    let spread = spec.spread();
    let mut points: Vec<PMeanPoint> = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut prev: Option<(f64, f64)> = None; // (p, ν)
    let mut prev_step: Option<(f64, f64)> = None; // (Δp, Δν)
    for &p in grid {
        let hint = prev.map(|(pp, nu)| {
            let (centre, radius) = match prev_step {
                Some((dp, dnu)) if dp > 0.0 => (nu + dnu * (p - pp) / dp, 2.0 * dnu.abs() + 0.1 * spread),
                _ => (nu, 0.1 * spread),
            };
            (centre, radius)
        });
        // The p = 1 solve ignores hints; bracketed solves use them.
        let opts = SolveOptions {
            tol,
            hint: if p > 1.0 { hint } else { None },
            ..SolveOptions::default()
        };
        match solve_pmean_with(spec, p, opts) {
            Ok(point) => {
                if let Some((pp, nu)) = prev {
                    prev_step = Some((p - pp, point.nu - nu));
                }
                prev = Some((p, point.nu));
                points.push(point);
            }
            Err(e) => {
                failures.push((p, e.to_string()));
                points.push(PMeanPoint {
                    p,
                    nu: f64::NAN,
                    balance_residual: f64::NAN,
                    balance_scale: f64::NAN,
                    nu_error: f64::NAN,
                    dnu_sign: DnuSign::Unknown,
                    dnu_dp: None,
                    sign_integral: None,
                    flat_median: false,
                });
            }
        }
    }
    if failures.len() * 5 >= grid.len() {
        return Err(Error::Curve(format!(
            "{} of {} grid points failed; first: p = {}: {}",
            failures.len(),
            grid.len(),
            failures[0].0,
            failures[0].1
        )));
    }
    // central differences of ν in p, one-sided at the ends
    let n = points.len();
    let nus: Vec<f64> = points.iter().map(|q| q.nu).collect();
    for (i, point) in points.iter_mut().enumerate() {
        let (a, b) = match (i.checked_sub(1), (i + 1 < n).then_some(i + 1)) {
            (Some(l), Some(r)) => (l, r),
            (None, Some(r)) => (i, r),
            (Some(l), None) => (l, i),
            (None, None) => continue,
        };
        if nus[a].is_finite() && nus[b].is_finite() {
            point.dnu_dp = Some((nus[b] - nus[a]) / (grid[b] - grid[a]));
        }
    }
    Ok(PMeanCurve {
        distribution: spec.describe(),
        grid: grid.to_vec(),
        points,
        failures,
    })
}

/// Outcome of an affine-equivariance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineReport {
    pub c: f64,
    pub s: f64,
    /// `(p, ν_p of cX+s, c·ν_p(X)+s)` per grid point.
    pub rows: Vec<(f64, f64, f64)>,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Solves both sides of `ν_p(cX+s) = c·ν_p(X) + s` independently over a grid.
pub fn verify_affine_equivariance(spec: &DistributionSpec, c: f64, s: f64, grid: &[f64]) -> Result<AffineReport> {
    let moved = spec.affine(c, s)?;
    let opts = SolveOptions {
        with_sign: false,
        ..SolveOptions::default()
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut max_dev: f64 = 0.0;
    for &p in grid {
        let base = solve_pmean_with(spec, p, opts)?.nu;
        let lhs = solve_pmean_with(&moved, p, opts)?.nu;
        let rhs = c * base + s;
        max_dev = max_dev.max((lhs - rhs).abs());
        rows.push((p, lhs, rhs));
    }
    let threshold = 1e-7 * c.abs().max(1.0);
    Ok(AffineReport {
        c,
        s,
        rows,
        max_deviation: max_dev,
        threshold,
        pass: max_dev <= threshold,
    })
}
