use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::Rng;
use rand_distr::StandardNormal;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Default w (log of per-component MI): 0.01 nats per pair, ρ ≈ 0.14. A
/// near-independent start keeps early training stable while leaving the
/// gradient alive (ρ = 0 is unreachable in this parametrization).
pub const W_INIT: f64 = -4.605_170_185_988_091; // ln 0.01

/// Optimization clamp for w. e^w is the per-component MI, so the cap bounds
/// ρ away from 1 while still allowing totals far beyond the tested range.
pub const W_MIN: f64 = -30.0;
pub const W_MAX: f64 = 3.912_023_005_428_146; // ln 50

/// Restricted zero-mean Gaussian base with identity marginal blocks and a
/// diagonal cross block `diag(ρ_j)`. One learnable parameter per paired
/// component: `w_j`, the log of the cross-component MI, with
/// `ρ_j = √(1 − exp(−2·e^{w_j}))`. Unpaired components (when the two sides
/// have different dimension) are independent standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagGaussianBase {
    dim_x: usize,
    dim_y: usize,
    w: Vec<f64>,
}

/// Per-pair whitening coefficients realizing `Σ^{-1/2}`:
/// `α_j = 1/(2√(1+ρ_j))`, `β_j = 1/(2√(1−ρ_j))`; identity on the unpaired
/// tail. Symmetric, and `W·Σ·W = I`.
#[derive(Debug, Clone)]
pub struct SparseWhitener {
    dim_x: usize,
    dim_y: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl TridiagGaussianBase {
    pub fn new(dim_x: usize, dim_y: usize) -> Self {
        let pairs = dim_x.min(dim_y);
        TridiagGaussianBase { dim_x, dim_y, w: vec![W_INIT; pairs] }
    }

    pub fn with_w(dim_x: usize, dim_y: usize, w: Vec<f64>) -> Self {
        assert_eq!(w.len(), dim_x.min(dim_y));
        TridiagGaussianBase { dim_x, dim_y, w }
    }

    pub fn dim(&self) -> usize {
        self.dim_x + self.dim_y
    }

    pub fn pairs(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn w_mut(&mut self) -> &mut Vec<f64> {
        &mut self.w
    }

    pub fn clamp_w(&mut self) {
        for v in &mut self.w {
            *v = v.clamp(W_MIN, W_MAX);
        }
    }

    /// Per-pair correlations ρ_j. `1 − ρ²` is `exp(−2 e^w)` by construction,
    /// so the value is computed through `expm1` for full precision at both
    /// ends of the range.
    pub fn rho(&self) -> Vec<f64> {
        self.w.iter().map(|&w| rho_of_w(w)).collect()
    }

    /// The estimator readout: MI of the base distribution in nats,
    /// `Σ_j e^{w_j}` (identically `−½ Σ_j log(1 − ρ_j²)`).
    pub fn mi(&self) -> f64 {
        self.w.iter().map(|&w| w.exp()).sum()
    }

    pub fn whitener(&self) -> SparseWhitener {
        let rho = self.rho();
        let mut alpha = Vec::with_capacity(rho.len());
        let mut beta = Vec::with_capacity(rho.len());
        for (&r, &w) in rho.iter().zip(self.w.iter()) {
            alpha.push(1.0 / (2.0 * (1.0 + r).sqrt()));
            // 1 − ρ = exp(−2 e^w)/(1 + ρ), stable as ρ → 1
            let one_minus = (-2.0 * w.exp()).exp() / (1.0 + r);
            beta.push(1.0 / (2.0 * one_minus.sqrt()));
        }
        SparseWhitener { dim_x: self.dim_x, dim_y: self.dim_y, alpha, beta }
    }

    /// Log-likelihood of a latent batch under the implied dense Gaussian,
    /// evaluated in O(d) per sample through the whitener:
    /// `ℓ(z) = Σ_j e^{w_j} − (D/2)·log 2π − ½‖W z‖²`.
    pub fn loglik(&self, z: &Matrix) -> Result<(f64, Vec<f64>)> {
        self.check_width(z)?;
        let mi = self.mi();
        let norm = -0.5 * self.dim() as f64 * LN_2PI + mi;
        let wh = self.whitener();
        let mut per_sample = Vec::with_capacity(z.rows());
        let mut total = 0.0;
        for i in 0..z.rows() {
            let q = wh.whitened_sq_norm(z.row(i));
            let ll = norm - 0.5 * q;
            if !ll.is_finite() {
                return Err(Error::NonFinite("tridiag loglik".into()));
            }
            per_sample.push(ll);
            total += ll;
        }
        Ok((total, per_sample))
    }

    /// Gradients of `Σ_i upstream_i · ℓ(z_i)` with respect to w and z.
    pub fn loglik_grad(&self, z: &Matrix, upstream: &[f64]) -> Result<(Vec<f64>, Matrix)> {
        self.check_width(z)?;
        if upstream.len() != z.rows() {
            return Err(Error::shape("tridiag grad: upstream length".to_string()));
        }
        let pairs = self.pairs();
        let rho = self.rho();
        let mut grad_w = vec![0.0; pairs];
        let mut grad_z = Matrix::zeros(z.rows(), z.cols());
        let up_sum: f64 = upstream.iter().sum();

        // dρ/dw = m e^{−2m} / ρ and d(−½ q_j)/dρ = [uv(1+ρ²) − ρ(u²+v²)]/(1−ρ²)²
        for j in 0..pairs {
            let m = self.w[j].exp();
            let r = rho[j];
            let e2m = (2.0 * m).exp(); // 1/(1−ρ²)
            let drho_dw = m * (-2.0 * m).exp() / r;
            let mut acc = 0.0;
            for i in 0..z.rows() {
                let u = z.get(i, j);
                let v = z.get(i, self.dim_x + j);
                let dq = (u * v * (1.0 + r * r) - r * (u * u + v * v)) * e2m * e2m;
                acc += upstream[i] * dq;
                // latent gradient: −Σ⁻¹z on the pair
                let gu = -(u - r * v) * e2m;
                let gv = -(v - r * u) * e2m;
                grad_z.set(i, j, upstream[i] * gu);
                grad_z.set(i, self.dim_x + j, upstream[i] * gv);
            }
            grad_w[j] = up_sum * m + acc * drho_dw;
        }
        // unpaired tail components are standard normal: gradient −t
        for i in 0..z.rows() {
            for j in pairs..self.dim_x {
                grad_z.set(i, j, -upstream[i] * z.get(i, j));
            }
            for j in pairs..self.dim_y {
                let col = self.dim_x + j;
                grad_z.set(i, col, -upstream[i] * z.get(i, col));
            }
        }
        if !grad_z.all_finite() || !grad_w.iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("tridiag loglik gradient".into()));
        }
        Ok((grad_w, grad_z))
    }

    /// Draw latent samples with the implied covariance.
    pub fn sample(&self, count: usize, rng: &mut Rng) -> Matrix {
        let rho = self.rho();
        let mut out = Matrix::zeros(count, self.dim());
        for i in 0..count {
            for j in 0..self.dim_x.min(self.dim_y) {
                let n1: f64 = rand::Rng::sample(rng, StandardNormal);
                let n2: f64 = rand::Rng::sample(rng, StandardNormal);
                let r = rho[j];
                out.set(i, j, n1);
                out.set(i, self.dim_x + j, r * n1 + (1.0 - r * r).sqrt() * n2);
            }
            for j in self.pairs()..self.dim_x {
                out.set(i, j, rand::Rng::sample(rng, StandardNormal));
            }
            for j in self.pairs()..self.dim_y {
                out.set(i, self.dim_x + j, rand::Rng::sample(rng, StandardNormal));
            }
        }
        out
    }

    /// The implied dense covariance (unit diagonal, `diag(ρ)` cross block).
    pub fn dense_sigma(&self) -> Matrix {
        let mut s = Matrix::identity(self.dim());
        for (j, r) in self.rho().into_iter().enumerate() {
            s.set(j, self.dim_x + j, r);
            s.set(self.dim_x + j, j, r);
        }
        s
    }

    fn check_width(&self, z: &Matrix) -> Result<()> {
        if z.cols() != self.dim() {
            return Err(Error::shape(format!(
                "latent width {} != {} + {}",
                z.cols(),
                self.dim_x,
                self.dim_y
            )));
        }
        Ok(())
    }
}

pub fn rho_of_w(w: f64) -> f64 {
    (-((-2.0 * w.exp()).exp_m1())).sqrt()
}

impl SparseWhitener {
    pub fn from_rho(dim_x: usize, dim_y: usize, rho: &[f64]) -> Self {
        assert_eq!(rho.len(), dim_x.min(dim_y));
        let alpha = rho.iter().map(|r| 1.0 / (2.0 * (1.0 + r).sqrt())).collect();
        let beta = rho.iter().map(|r| 1.0 / (2.0 * (1.0 - r).sqrt())).collect();
        SparseWhitener { dim_x, dim_y, alpha, beta }
    }

    pub fn dim(&self) -> usize {
        self.dim_x + self.dim_y
    }

    /// ‖W z‖² for one joint sample, in O(d).
    #[inline]
    pub fn whitened_sq_norm(&self, z: &[f64]) -> f64 {
        let mut q = 0.0;
        for j in 0..self.alpha.len() {
            let (a, b) = (self.alpha[j] + self.beta[j], self.alpha[j] - self.beta[j]);
            let u = z[j];
            let v = z[self.dim_x + j];
            let wu = a * u + b * v;
            let wv = b * u + a * v;
            q += wu * wu + wv * wv;
        }
        for j in self.alpha.len()..self.dim_x {
            q += z[j] * z[j];
        }
        for j in self.alpha.len()..self.dim_y {
            q += z[self.dim_x + j] * z[self.dim_x + j];
        }
        q
    }

    /// Apply W to a batch.
    pub fn apply(&self, z: &Matrix) -> Matrix {
        assert_eq!(z.cols(), self.dim());
        let mut out = z.clone();
        for i in 0..z.rows() {
            let row = out.row_mut(i);
            for j in 0..self.alpha.len() {
                let (a, b) = (self.alpha[j] + self.beta[j], self.alpha[j] - self.beta[j]);
                let u = row[j];
                let v = row[self.dim_x + j];
                row[j] = a * u + b * v;
                row[self.dim_x + j] = b * u + a * v;
            }
        }
        out
    }

    /// Materialize W as a dense matrix (tests and diagnostics).
    pub fn as_dense(&self) -> Matrix {
        let mut w = Matrix::identity(self.dim());
        for j in 0..self.alpha.len() {
            let (a, b) = (self.alpha[j] + self.beta[j], self.alpha[j] - self.beta[j]);
            w.set(j, j, a);
            w.set(self.dim_x + j, self.dim_x + j, a);
            w.set(j, self.dim_x + j, b);
            w.set(self.dim_x + j, j, b);
        }
        w
    }
}
