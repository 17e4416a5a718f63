use super::{crossing_profile, fmt_range, Conclusion, Evidence, Grade, SkewVerdict, Witness};
use crate::dist::{DistributionSpec, Family};
use crate::error::Result;
use crate::pmean::solve_pmean;

const CRITERION: &str = "clopen_threshold";
const SPOT_CHECKS: usize = 5;

/// Threshold `C` such that `ν(·)` is increasing at every `p` with `ν_p > C`,
/// for the families where this is known; in the spec's coordinates.
pub fn clopen_threshold(spec: &DistributionSpec) -> Option<f64> {
    if spec.is_reflected() {
        return None;
    }
    let base = match spec.family() {
        Family::Levy { mu, lambda } => mu + 2.0 * lambda / 3.0,
        Family::ChiSquared { k } if *k > 2 => f64::from(*k) - 2.0,
        Family::Weibull { k, .. } if *k > 1.0 => spec.family().mode_closed()?,
        _ => return None,
    };
    Some(spec.from_base(base))
}

/// Certifies true positive skewness from `ν₁ > C` and `ν₁ > ν₀`, with a
/// single-crossing spot check at five grid points.
///
/// `ν₁ ≤ C` leaves the criterion inapplicable; `ν₁ < ν₀` beyond the solver
/// error refutes true positive skewness.
pub fn clopen_certify(spec: &DistributionSpec, threshold: f64, grid: &[f64]) -> Result<SkewVerdict> {
    let median = solve_pmean(spec, 1.0, 1e-10)?;
    let nu1 = median.nu;
    let err = median.nu_error.max(1e-12 * nu1.abs().max(spec.spread()));
    let mode = spec.mode().or(spec.analytic_facts().boundary_mode);
    let mut evidence = Vec::new();

    if let Some(nu0) = mode {
        if nu1 < nu0 - 10.0 * err {
            evidence.push(
                Evidence::new(CRITERION, "median exceeds mode", false)
                    .with("nu0", nu0)
                    .with("nu1", nu1),
            );
            let mut v = SkewVerdict::new(spec, Conclusion::NotTrulyPositive, Some(Grade::Refuted));
            v.evidence = evidence;
            v.witness = Some(Witness::MedianBelowMode { nu0, nu1 });
            return Ok(v);
        }
    }

    let above = nu1 > threshold + 10.0 * err;
    evidence.push(
        Evidence::new(CRITERION, format!("median exceeds C = {threshold}"), above)
            .with("C", threshold)
            .with("nu1", nu1),
    );
    let above_mode = mode.is_none_or(|nu0| nu1 > nu0 + 10.0 * err);
    let mut mode_ev = Evidence::new(CRITERION, "median exceeds mode", above_mode).with("nu1", nu1);
    if let Some(nu0) = mode {
        mode_ev = mode_ev.with("nu0", nu0);
    }
    evidence.push(mode_ev);
    if !above || !above_mode {
        return Ok(SkewVerdict::indeterminate(spec, evidence));
    }

    // single-crossing spot checks spread over the grid
    let mut all = true;
    let n = grid.len();
    let picks: Vec<usize> = if n <= SPOT_CHECKS {
        (0..n).collect()
    } else {
        let mut v: Vec<usize> = (0..SPOT_CHECKS).map(|i| i * (n - 1) / (SPOT_CHECKS - 1)).collect();
        v.dedup();
        v
    };
    for i in picks {
        let prof = crossing_profile(spec, grid[i])?;
        all &= prof.satisfies_l2;
        let mut ev = Evidence::new("single_crossing", format!("p = {}", grid[i]), prof.satisfies_l2)
            .with("nu", prof.nu)
            .with("crossings", prof.crossing_count as f64);
        if let Some(c) = prof.c_p {
            ev = ev.with("c_p", c);
        }
        evidence.push(ev);
    }
    if !all {
        let mut v = SkewVerdict::indeterminate(spec, evidence);
        v.evidence.push(Evidence::new(CRITERION, fmt_range(grid), false).note("spot check failed"));
        return Ok(v);
    }
    let mut v = SkewVerdict::new(spec, Conclusion::TrulyPositive, Some(Grade::Analytic));
    v.evidence = evidence;
    Ok(v)
}
