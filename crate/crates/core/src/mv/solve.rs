use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::MVSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvSolveOptions {
    /// Stop when the gradient norm is at most `tol · (1 + objective)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MvSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Minimizer of `(1/n) Σ‖x_i − a‖^p` with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MvPMean {
    pub nu: Vec<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at every iterate, starting from the sample mean.
    pub objective_trace: Vec<f64>,
}

/// Sample p-mean, or an optimization error when it does not converge.
pub fn mv_pmean(sample: &MVSample, p: f64, tol: f64) -> Result<Vec<f64>> {
    let r = mv_pmean_with(sample, p, MvSolveOptions { tol, ..Default::default() })?;
    if !r.converged {
        return Err(Error::Optimization(format!(
            "p = {p}: gradient norm {} after {} iterations (objective {})",
            r.gradient_norm, r.iterations, r.objective
        )));
    }
    Ok(r.nu)
}

/// Runs the minimizer from the sample mean and reports how it ended.
/// `p = 1` uses the Weiszfeld iteration with the Vardi–Zhang guard at sample
/// points; `p > 1` uses Newton steps with backtracking, falling back to the
/// negative gradient when the Newton direction is unusable.
pub fn mv_pmean_with(sample: &MVSample, p: f64, opts: MvSolveOptions) -> Result<MvPMean> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must be a real number ≥ 1, got {p}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let start = sample.mean();
    Ok(if p == 1.0 {
        weiszfeld(sample, start, opts)
    } else {
        newton(sample, p, start, opts)
    })
}

fn objective(sample: &MVSample, p: f64, a: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in sample.rows() {
        let s: f64 = x.iter().zip(a).map(|(xi, ai)| (ai - xi) * (ai - xi)).sum();
        total += if p == 2.0 { s } else { s.powf(0.5 * p) };
    }
    total / sample.n() as f64
}

struct Local {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

fn local(sample: &MVSample, p: f64, a: &[f64]) -> Local {
    let k = sample.dim();
    let mut value = 0.0;
    let mut grad = DVector::zeros(k);
    let mut hess = DMatrix::zeros(k, k);
    let mut r = DVector::zeros(k);
    for x in sample.rows() {
        for i in 0..k {
            r[i] = a[i] - x[i];
        }
        let s = r.norm_squared();
        if s == 0.0 {
            continue;
        }
        let w = s.powf(0.5 * p - 1.0);
        value += w * s;
        grad.axpy(p * w, &r, 1.0);
        // p‖r‖^{p−2} (I + (p − 2) r rᵀ/‖r‖²)
        for i in 0..k {
            hess[(i, i)] += p * w;
        }
        hess.ger(p * (p - 2.0) * w / s, &r, &r, 1.0);
    }
    let n = sample.n() as f64;
    Local {
        value: value / n,
        grad: grad / n,
        hess: hess / n,
    }
}

fn newton(sample: &MVSample, p: f64, start: Vec<f64>, opts: MvSolveOptions) -> MvPMean {
    let mut a = DVector::from_vec(start);
    let mut trace = Vec::new();
    let mut here = local(sample, p, a.as_slice());
    trace.push(here.value);
    let mut iterations = 0;
    loop {
        let gnorm = here.grad.norm();
        if gnorm <= opts.tol * (1.0 + here.value) {
            return finish(a, here.value, gnorm, iterations, true, trace);
        }
        if iterations == opts.max_iter {
            return finish(a, here.value, gnorm, iterations, false, trace);
        }
        iterations += 1;
        let newton_dir = here
            .hess
            .clone()
            .cholesky()
            .map(|c| -c.solve(&here.grad))
            .filter(|d| d.iter().all(|v| v.is_finite()) && d.dot(&here.grad) < 0.0);
        let is_newton = newton_dir.is_some();
        let dir = newton_dir.unwrap_or_else(|| -&here.grad);
        let slope = dir.dot(&here.grad);
        let mut t = 1.0;
        let mut accepted = None;
        // Once the predicted decrease is below the rounding noise of the
        // objective, the line search cannot tell steps apart; the Newton step
        // is then taken as is.
        if is_newton && -slope <= 1e-12 * (1.0 + here.value) {
            accepted = Some(&a + &dir);
        }
        for _ in 0..if accepted.is_some() { 0 } else { 60 } {
            let trial = &a + t * &dir;
            let v = objective(sample, p, trial.as_slice());
            if v <= here.value + 1e-4 * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                a = next;
                here = local(sample, p, a.as_slice());
                trace.push(here.value);
            }
            // no decrease representable along the direction
            None => return finish(a, here.value, gnorm, iterations, false, trace),
        }
    }
}

fn weiszfeld(sample: &MVSample, start: Vec<f64>, opts: MvSolveOptions) -> MvPMean {
    let k = sample.dim();
    let n = sample.n() as f64;
    let mut a = DVector::from_vec(start);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let mut value = 0.0;
        let mut num = DVector::<f64>::zeros(k);
        let mut den = 0.0;
        let mut pull = DVector::<f64>::zeros(k);
        let mut coincident = 0usize;
        for x in sample.rows() {
            let d = x.iter().zip(a.iter()).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum::<f64>().sqrt();
            if d == 0.0 {
                coincident += 1;
                continue;
            }
            value += d;
            den += 1.0 / d;
            for i in 0..k {
                num[i] += x[i] / d;
                pull[i] += (x[i] - a[i]) / d;
            }
        }
        value /= n;
        trace.push(value);
        // subgradient norm at a, allowing for mass sitting exactly at a
        let r = pull.norm();
        let gnorm = (r - coincident as f64).max(0.0) / n;
        if gnorm <= opts.tol * (1.0 + value) || den == 0.0 {
            return finish(a, value, gnorm, iterations, true, trace);
        }
        if iterations == opts.max_iter {
            return finish(a, value, gnorm, iterations, false, trace);
        }
        iterations += 1;
        let t = num / den;
        a = if coincident == 0 {
            t
        } else {
            let eta = coincident as f64 / r;
            (1.0 - eta).max(0.0) * t + eta.min(1.0) * &a
        };
    }
}

fn finish(a: DVector<f64>, objective: f64, gradient_norm: f64, iterations: usize, converged: bool, trace: Vec<f64>) -> MvPMean {
    MvPMean {
        nu: a.as_slice().to_vec(),
        objective,
        gradient_norm,
        iterations,
        converged,
        objective_trace: trace,
    }
}
