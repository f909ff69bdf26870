use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::stats::{covariance, mean_vec};
use crate::numerics::{cholesky_logdet, cholesky_solve, ridge_regularized, Matrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateMode {
    Exact,
    Ema,
}

/// Unrestricted Gaussian base with moments maintained from latent batches:
/// either the batch maximum-likelihood estimates or an exponential moving
/// average of them. The first update always copies the batch moments so the
/// EMA never blends toward the arbitrary N(0, I) start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullGaussianBase {
    pub mean: Vec<f64>,
    pub cov: Matrix,
    pub gamma: f64,
    initialized: bool,
}

impl FullGaussianBase {
    pub fn new(dim: usize, gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma <= 1.0, "EMA coefficient must be in (0, 1]");
        FullGaussianBase {
            mean: vec![0.0; dim],
            cov: Matrix::identity(dim),
            gamma,
            initialized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fold a latent batch into the moment estimates.
    pub fn update(&mut self, z: &Matrix, mode: UpdateMode) {
        assert!(z.rows() > 0, "moment update needs a nonempty batch");
        assert_eq!(z.cols(), self.dim());
        let m = mean_vec(z);
        let c = covariance(z);
        let g = match mode {
            UpdateMode::Exact => 1.0,
            UpdateMode::Ema if !self.initialized => 1.0,
            UpdateMode::Ema => self.gamma,
        };
        for (dst, &src) in self.mean.iter_mut().zip(m.iter()) {
            *dst = (1.0 - g) * *dst + g * src;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = (1.0 - g) * self.cov.get(i, j) + g * c.get(i, j);
                self.cov.set(i, j, v);
            }
        }
        self.initialized = true;
    }

    fn factor(&self) -> Result<(Matrix, f64)> {
        cholesky_logdet(&ridge_regularized(&self.cov))
    }

    /// Standard multivariate-normal log-density of each row.
    pub fn loglik(&self, z: &Matrix) -> Result<(f64, Vec<f64>)> {
        if z.cols() != self.dim() {
            return Err(Error::shape("full gaussian loglik: width mismatch".to_string()));
        }
        let (l, logdet) = self.factor()?;
        let norm = -0.5 * (self.dim() as f64 * LN_2PI + logdet);
        let mut per_sample = Vec::with_capacity(z.rows());
        let mut total = 0.0;
        let mut centered = vec![0.0; self.dim()];
        for i in 0..z.rows() {
            for (c, (&v, &m)) in centered.iter_mut().zip(z.row(i).iter().zip(self.mean.iter())) {
                *c = v - m;
            }
            let half = crate::numerics::solve_lower(&l, &centered);
            let q: f64 = half.iter().map(|x| x * x).sum();
            let ll = norm - 0.5 * q;
            per_sample.push(ll);
            total += ll;
        }
        Ok((total, per_sample))
    }

    /// Gradient of `Σ_i upstream_i · ℓ(z_i)` with respect to the latents:
    /// `−Σ̂⁻¹ (z − m̂)` per row. Moments are treated as constants.
    pub fn loglik_grad(&self, z: &Matrix, upstream: &[f64]) -> Result<Matrix> {
        if z.cols() != self.dim() {
            return Err(Error::shape("full gaussian grad: width mismatch".to_string()));
        }
        if upstream.len() != z.rows() {
            return Err(Error::shape("full gaussian grad: upstream length".to_string()));
        }
        let (l, _) = self.factor()?;
        let mut grad = Matrix::zeros(z.rows(), z.cols());
        let mut centered = vec![0.0; self.dim()];
        for i in 0..z.rows() {
            for (c, (&v, &m)) in centered.iter_mut().zip(z.row(i).iter().zip(self.mean.iter())) {
                *c = v - m;
            }
            let solved = cholesky_solve(&l, &centered);
            for (j, s) in solved.into_iter().enumerate() {
                grad.set(i, j, -upstream[i] * s);
            }
        }
        Ok(grad)
    }

    /// Differential entropy of the fitted Gaussian, `d/2·log(2πe) + ½·logdet`.
    pub fn entropy(&self) -> Result<f64> {
        let (_, logdet) = self.factor()?;
        Ok(0.5 * self.dim() as f64 * (LN_2PI + 1.0) + 0.5 * logdet)
    }
}
