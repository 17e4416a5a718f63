//! Scalar root finding on a bracket.

use crate::error::Result;

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    /// Final bracket, containing a sign change.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

#[allow(clippy::too_many_arguments)]
/// Brent's method on `[a, b]` with `f(a)` and `f(b)` of opposite signs.
///
/// Stops when the bracket is narrower than `xtol`, when `|f| ≤ ftol`, or
/// after `max_iter` steps.
pub fn brent(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Root> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, lo: a, hi: a, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, lo: b, hi: b, iterations: 0 });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut it = 0;
    loop {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= ftol || it >= max_iter {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok(Root { x: b, fx: fb, lo, hi, iterations: it });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        it += 1;
    }
}

/// Smallest point of `[lo, hi]` where a monotone predicate turns true,
/// located to `xtol`. Requires `pred(hi)`.
pub fn bisect_predicate(mut pred: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = brent(f, 0.0, 2.0, -2.0, 6.0, 1e-15, 0.0, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
        assert!(r.lo <= r.x && r.x <= r.hi);
    }

    #[test]
    fn predicate_bisection_takes_infimum() {
        let x = bisect_predicate(|x| x >= 0.3, 0.0, 1.0, 1e-15);
        assert!((x - 0.3).abs() < 1e-15);
    }
}
