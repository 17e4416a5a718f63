use crate::error::{Error, Result};
use crate::roots::brent;

fn finite_balance(atoms: &[(f64, f64)], a: f64, p: f64) -> f64 {
    atoms
        .iter()
        .map(|&(x, w)| {
            let d = x - a;
            if d == 0.0 {
                0.0
            } else {
                w * d.signum() * d.abs().powf(p - 1.0)
            }
        })
        .sum()
}

fn weighted_pmean(mut atoms: Vec<(f64, f64)>, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be a real number ≥ 1, got {p}")));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = atoms[0].0;
    let hi = atoms[atoms.len() - 1].0;
    if lo == hi {
        return Ok(lo);
    }
    if p == 1.0 {
        // smallest atom carrying the cumulative mass past one half
        let mut acc = 0.0;
        for &(x, w) in &atoms {
            acc += w;
            if acc >= 0.5 - 1e-12 {
                return Ok(x);
            }
        }
        return Ok(hi);
    }
    if p == 2.0 {
        return Ok(atoms.iter().map(|(x, w)| x * w).sum());
    }
    let f = |a: f64| Ok(finite_balance(&atoms, a, p));
    let (fa, fb) = (finite_balance(&atoms, lo, p), finite_balance(&atoms, hi, p));
    let r = brent(f, lo, hi, fa, fb, 4.0 * f64::EPSILON * lo.abs().max(hi.abs()), 0.0, 500)?;
    Ok(r.x)
}

/// p-mean of a finitely supported law given as `(atom, probability)` pairs.
///
/// At `p = 1` this is the smallest atom whose cumulative probability reaches
/// one half.
pub fn discrete_pmean(pmf: &[(f64, f64)], p: f64) -> Result<f64> {
    if pmf.is_empty() {
        return Err(Error::InvalidParameter("empty probability mass function".into()));
    }
    let mut total = 0.0;
    for &(x, w) in pmf {
        if !x.is_finite() || !(w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "atoms need finite locations and positive probabilities, got ({x}, {w})"
            )));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
    }
    weighted_pmean(pmf.to_vec(), p)
}

/// p-mean of the empirical law of `samples`; the lower median at `p = 1`.
pub fn empirical_pmean(samples: &[f64], p: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    let n = samples.len();
    if p == 1.0 {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        return Ok(v[(n - 1) / 2]);
    }
    if p == 2.0 {
        return Ok(samples.iter().sum::<f64>() / n as f64);
    }
    let w = 1.0 / n as f64;
    weighted_pmean(samples.iter().map(|&x| (x, w)).collect(), p)
}
