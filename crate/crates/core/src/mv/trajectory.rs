use serde::{Deserialize, Serialize};

use super::solve::{mv_pmean_with, MvSolveOptions};
use super::{sample_mvsn, MVSNSpec, MVSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    /// Half-width of the central difference in p.
    pub h: f64,
    /// Leave-out blocks for the jackknife.
    pub blocks: usize,
    /// A tangent counts when `‖Δν‖` exceeds this many jackknife standard errors.
    pub reliability: f64,
    pub tol: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            h: 0.05,
            blocks: 10,
            reliability: 5.0,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEntry {
    pub p: f64,
    pub nu: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tangent {
    pub p: f64,
    /// Unit tangent; absent when the difference is within noise.
    pub tau: Option<Vec<f64>>,
    /// `‖ν(p + h) − ν(p − h)‖`, one-sided at `p = 1`.
    pub delta_norm: f64,
    pub jackknife_se: f64,
}

impl Tangent {
    pub fn reliable(&self) -> bool {
        self.tau.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MVTrajectory {
    pub entries: Vec<TrajectoryEntry>,
    pub tangents: Vec<Tangent>,
}

impl MVTrajectory {
    pub fn reliable_tangents(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.tangents.iter().filter_map(|t| t.tau.as_deref().map(|tau| (t.p, tau)))
    }

    /// CSV with columns `p, nu_1..nu_k, tau_1..tau_k, reliable`; unreliable
    /// tangents leave their cells empty.
    pub fn to_csv(&self) -> String {
        let k = self.entries.first().map_or(0, |e| e.nu.len());
        let mut out = String::from("p");
        for i in 1..=k {
            out.push_str(&format!(",nu_{i}"));
        }
        for i in 1..=k {
            out.push_str(&format!(",tau_{i}"));
        }
        out.push_str(",reliable\n");
        for (e, t) in self.entries.iter().zip(&self.tangents) {
            out.push_str(&crate::fmt_f64(e.p));
            for v in &e.nu {
                out.push(',');
                out.push_str(&crate::fmt_f64(*v));
            }
            for i in 0..k {
                out.push(',');
                if let Some(tau) = &t.tau {
                    out.push_str(&crate::fmt_f64(tau[i]));
                }
            }
            out.push_str(if t.reliable() { ",true\n" } else { ",false\n" });
        }
        out
    }
}

/// Draws one sample with `seed` and traces the p-means over `p_grid`.
pub fn trajectory(spec: &MVSNSpec, p_grid: &[f64], n: usize, seed: u64) -> Result<MVTrajectory> {
    let sample = sample_mvsn(spec, n, seed)?;
    trajectory_with(&sample, p_grid, TrajectoryOptions::default())
}

/// Solves at every grid p on the shared sample and estimates the unit
/// tangent by a central difference, with a leave-block-out jackknife for its
/// standard error.
pub fn trajectory_with(sample: &MVSample, p_grid: &[f64], opts: TrajectoryOptions) -> Result<MVTrajectory> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter("p grid is empty".into()));
    }
    if p_grid.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
        return Err(Error::Domain("every p must be a real number ≥ 1".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("p grid must be strictly increasing".into()));
    }
    if !(opts.h > 0.0) || opts.blocks < 2 || opts.blocks > sample.n() {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and between 2 and n jackknife blocks, got h = {} and {} blocks",
            opts.h, opts.blocks
        )));
    }
    let solve = MvSolveOptions {
        tol: opts.tol,
        ..Default::default()
    };
    let nu_at = |s: &MVSample, p: f64| -> Result<Vec<f64>> {
        let r = mv_pmean_with(s, p, solve)?;
        if !r.converged {
            return Err(Error::Optimization(format!(
                "p = {p}: gradient norm {} after {} iterations",
                r.gradient_norm, r.iterations
            )));
        }
        Ok(r.nu)
    };
    let diff = |s: &MVSample, p: f64| -> Result<Vec<f64>> {
        let (lo, hi) = ((p - opts.h).max(1.0), p + opts.h);
        let (a, b) = (nu_at(s, lo)?, nu_at(s, hi)?);
        Ok(b.iter().zip(&a).map(|(x, y)| x - y).collect())
    };

    let n = sample.n();
    let leave_out: Vec<MVSample> = (0..opts.blocks)
        .map(|b| sample.without_rows(b * n / opts.blocks, (b + 1) * n / opts.blocks))
        .collect();

    let mut entries = Vec::with_capacity(p_grid.len());
    let mut tangents = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let r = mv_pmean_with(sample, p, solve)?;
        entries.push(TrajectoryEntry {
            p,
            nu: r.nu,
            converged: r.converged,
        });

        let delta = diff(sample, p)?;
        let partial = leave_out.iter().map(|s| diff(s, p)).collect::<Result<Vec<_>>>()?;
        let b = opts.blocks as f64;
        let k = delta.len();
        let centre: Vec<f64> = (0..k).map(|i| partial.iter().map(|d| d[i]).sum::<f64>() / b).collect();
        let ss: f64 = partial
            .iter()
            .map(|d| d.iter().zip(&centre).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
            .sum();
        let jackknife_se = ((b - 1.0) / b * ss).sqrt();
        let delta_norm = norm(&delta);
        let tau = (delta_norm > opts.reliability * jackknife_se && delta_norm > 0.0)
            .then(|| delta.iter().map(|d| d / delta_norm).collect());
        tangents.push(Tangent {
            p,
            tau,
            delta_norm,
            jackknife_se,
        });
    }
    Ok(MVTrajectory { entries, tangents })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Smallest cosine between a reliable tangent and `direction`.
pub fn colinearity_score(traj: &MVTrajectory, direction: &[f64]) -> Result<f64> {
    let len = norm(direction);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::InvalidParameter("direction must be a non-zero finite vector".into()));
    }
    let mut score: Option<f64> = None;
    for (_, tau) in traj.reliable_tangents() {
        if tau.len() != direction.len() {
            return Err(Error::InvalidParameter("direction has the wrong dimension".into()));
        }
        let c = tau.iter().zip(direction).map(|(t, d)| t * d).sum::<f64>() / len;
        score = Some(score.map_or(c, |s| s.min(c)));
    }
    score.ok_or_else(|| Error::Undefined("trajectory has no reliable tangents".into()))
}
