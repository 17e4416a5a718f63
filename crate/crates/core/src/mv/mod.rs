//! Multivariate Fréchet p-means for the skew-normal family.
//!
//! The law is `2 φ_k(y; μ, Σ) Φ(λᵀΣ^{−1/2}(y − μ))`. Population p-means are
//! approximated by minimizing the sample average of `‖x − a‖^p` over one
//! seeded Monte-Carlo sample, which is reused across all p so that the
//! tangent of the trajectory reflects p rather than resampling noise.

mod solve;
mod trajectory;

#[cfg(test)]
mod tests;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::log_norm_cdf;

pub use solve::{mv_pmean, mv_pmean_with, MvPMean, MvSolveOptions};
pub use trajectory::{
    colinearity_score, trajectory, trajectory_with, MVTrajectory, Tangent, TrajectoryEntry, TrajectoryOptions,
};

/// Skew-normal law in `k` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MVSNSpec {
    pub mu: Vec<f64>,
    /// Symmetric positive-definite scale matrix, row by row.
    pub sigma: Vec<Vec<f64>>,
    /// Skewness vector `λ`.
    pub lambda_skew: Vec<f64>,
}

/// Symmetric square root of `Σ`, its inverse and `log det Σ`.
#[derive(Debug, Clone)]
struct Factors {
    root: DMatrix<f64>,
    inv_root: DMatrix<f64>,
    log_det: f64,
}

impl MVSNSpec {
    /// Validates dimensions, symmetry and positive definiteness.
    pub fn new(mu: Vec<f64>, sigma: Vec<Vec<f64>>, lambda_skew: Vec<f64>) -> Result<Self> {
        let spec = Self { mu, sigma, lambda_skew };
        spec.factors()?;
        Ok(spec)
    }

    /// `μ = 0`, `Σ = I`.
    pub fn standard(lambda_skew: Vec<f64>) -> Result<Self> {
        let k = lambda_skew.len();
        let sigma = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(vec![0.0; k], sigma, lambda_skew)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    fn factors(&self) -> Result<Factors> {
        let k = self.mu.len();
        if k == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if self.lambda_skew.len() != k || self.sigma.len() != k || self.sigma.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter(format!(
                "mu, sigma and lambda must agree in dimension {k}"
            )));
        }
        let all = self.mu.iter().chain(self.lambda_skew.iter()).chain(self.sigma.iter().flatten());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        let m = DMatrix::from_fn(k, k, |i, j| self.sigma[i][j]);
        let scale = m.amax();
        for i in 0..k {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter("sigma must be symmetric".into()));
                }
            }
        }
        let eig = SymmetricEigen::new(m);
        let min = eig.eigenvalues.min();
        if !(min > 1e-14 * scale) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive definite (smallest eigenvalue {min})"
            )));
        }
        let v = &eig.eigenvectors;
        let root = v * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * v.transpose();
        let inv_root = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt())) * v.transpose();
        let log_det = eig.eigenvalues.iter().map(|e| e.ln()).sum();
        Ok(Factors { root, inv_root, log_det })
    }

    /// Density at `y`.
    pub fn pdf(&self, y: &[f64]) -> Result<f64> {
        let f = self.factors()?;
        Ok(self.log_pdf_with(&f, y).exp())
    }

    fn log_pdf_with(&self, f: &Factors, y: &[f64]) -> f64 {
        let k = self.dim();
        let d = DVector::from_fn(k, |i, _| y[i] - self.mu[i]);
        let z = &f.inv_root * d;
        let lam = DVector::from_column_slice(&self.lambda_skew);
        std::f64::consts::LN_2 - 0.5 * k as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * f.log_det
            - 0.5 * z.norm_squared()
            + log_norm_cdf(lam.dot(&z))
    }

    /// Density on a regular `n × n` grid over `[x0, x1] × [y0, y1]`, as
    /// `(x, y, density)` rows with `y` varying fastest. Two dimensions only.
    pub fn density_grid(&self, x: (f64, f64), y: (f64, f64), n: usize) -> Result<Vec<[f64; 3]>> {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter("density grids need a bivariate law".into()));
        }
        if n < 2 {
            return Err(Error::InvalidParameter("density grids need at least 2 points per axis".into()));
        }
        let f = self.factors()?;
        let at = |(a, b): (f64, f64), i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (at(x, i), at(y, j));
                rows.push([u, v, self.log_pdf_with(&f, &[u, v]).exp()]);
            }
        }
        Ok(rows)
    }
}

/// Points drawn from an [`MVSNSpec`], stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct MVSample {
    /// Seed of the generator, absent for samples built from given points.
    pub seed: Option<u64>,
    dim: usize,
    data: Vec<f64>,
}

impl MVSample {
    /// Wraps explicit points; all rows must share one non-zero length.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 || points.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("points must be non-empty rows of equal length".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("points must be finite".into()));
        }
        Ok(Self {
            seed: None,
            dim,
            data: points.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, b) in m.iter_mut().zip(r) {
                *a += b;
            }
        }
        let n = self.n() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// The sample with rows `[start, end)` removed.
    pub fn without_rows(&self, start: usize, end: usize) -> Self {
        let mut data = Vec::with_capacity(self.data.len() - (end - start) * self.dim);
        data.extend_from_slice(&self.data[..start * self.dim]);
        data.extend_from_slice(&self.data[end * self.dim..]);
        Self {
            seed: self.seed,
            dim: self.dim,
            data,
        }
    }
}

/// Draws `n` points with `Z = δ|U₀| + (I − δδᵀ)^{1/2} U`, `δ = λ/√(1 + λᵀλ)`,
/// and `Y = μ + Σ^{1/2} Z`, where `U₀` and `U` are independent standard
/// normals. The same seed gives the same points.
pub fn sample_mvsn(spec: &MVSNSpec, n: usize, seed: u64) -> Result<MVSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let f = spec.factors()?;
    let k = spec.dim();
    let lam = DVector::from_column_slice(&spec.lambda_skew);
    let delta = &lam / (1.0 + lam.norm_squared()).sqrt();
    let d2 = delta.norm_squared();
    // (I − δδᵀ)^{1/2} = I − c δδᵀ
    let c = if d2 > 0.0 { (1.0 - (1.0 - d2).sqrt()) / d2 } else { 0.0 };
    let a = DMatrix::identity(k, k) - c * &delta * delta.transpose();
    let map = &f.root * a;
    let shift = &f.root * &delta;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * k);
    let mut u = DVector::zeros(k);
    for _ in 0..n {
        let u0: f64 = StandardNormal.sample(&mut rng);
        for ui in u.iter_mut() {
            *ui = StandardNormal.sample(&mut rng);
        }
        let y = &map * &u + &shift * u0.abs();
        data.extend(y.iter().zip(&spec.mu).map(|(v, m)| v + m));
    }
    Ok(MVSample {
        seed: Some(seed),
        dim: k,
        data,
    })
}
