//! Base (latent) distributions: the restricted tridiagonal Gaussian family
//! with one learnable w-parameter per paired component, and the full
//! Gaussian family with ML/EMA moment estimates.

mod full;
mod tridiag;

pub use full::{FullGaussianBase, UpdateMode};
pub use tridiag::{rho_of_w, SparseWhitener, TridiagGaussianBase, W_INIT, W_MAX, W_MIN};

use crate::error::Result;
use crate::numerics::Matrix;

/// Anything that can score latent samples; used by the KLD diagnostic.
pub trait LatentDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, z: &Matrix) -> Result<Vec<f64>>;
}

impl LatentDensity for TridiagGaussianBase {
    fn dim(&self) -> usize {
        TridiagGaussianBase::dim(self)
    }

    fn log_density(&self, z: &Matrix) -> Result<Vec<f64>> {
        Ok(self.loglik(z)?.1)
    }
}

impl LatentDensity for FullGaussianBase {
    fn dim(&self) -> usize {
        FullGaussianBase::dim(self)
    }

    fn log_density(&self, z: &Matrix) -> Result<Vec<f64>> {
        Ok(self.loglik(z)?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats::{covariance, ks_uniform, mean_vec};
    use crate::numerics::{cholesky_logdet, std_normal_cdf, svd, sym_eigen, Matrix};
    use crate::rng::rng_from_seed;
    use rand::Rng;

    const LN_2PI: f64 = 1.837_877_066_409_345_5;

    /// Dense multivariate-normal log-density via Cholesky on the implied Σ —
    /// the oracle for the O(d) whitener path.
    fn dense_loglik(sigma: &Matrix, z: &[f64]) -> f64 {
        let (l, logdet) = cholesky_logdet(sigma).unwrap();
        let half = crate::numerics::solve_lower(&l, z);
        let q: f64 = half.iter().map(|x| x * x).sum();
        -0.5 * (z.len() as f64 * LN_2PI + logdet + q)
    }

    #[test]
    fn independent_limit_is_standard_normal() {
        let base = TridiagGaussianBase::with_w(2, 2, vec![-700.0, -700.0]);
        let z = Matrix::from_rows(&[vec![0.3, -1.0, 0.7, 2.0]]).unwrap();
        let (_, ll) = base.loglik(&z).unwrap();
        let expect: f64 =
            z.row(0).iter().map(|v| -0.5 * (LN_2PI + v * v)).sum();
        assert!((ll[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn bivariate_at_origin() {
        // ρ = 0.5 means e^{−2m} = 0.75, w = ln(−½ ln 0.75)
        let m = -0.5 * 0.75f64.ln();
        let base = TridiagGaussianBase::with_w(1, 1, vec![m.ln()]);
        let rho = base.rho()[0];
        assert!((rho - 0.5).abs() < 1e-14);
        let z = Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let (_, ll) = base.loglik(&z).unwrap();
        let expect = -LN_2PI - 0.5 * 0.75f64.ln();
        assert!((ll[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn loglik_matches_dense_oracle() {
        let mut rng = rng_from_seed(14);
        for (dx, dy) in [(2usize, 2usize), (3, 1), (2, 5)] {
            let pairs = dx.min(dy);
            let w: Vec<f64> = (0..pairs).map(|_| rng.random_range(-3.0..1.0)).collect();
            let base = TridiagGaussianBase::with_w(dx, dy, w);
            let sigma = base.dense_sigma();
            let mut z = Matrix::zeros(6, dx + dy);
            for v in z.data_mut() {
                *v = rng.random_range(-2.0..2.0);
            }
            let (_, ll) = base.loglik(&z).unwrap();
            for i in 0..z.rows() {
                let oracle = dense_loglik(&sigma, z.row(i));
                assert!(
                    (ll[i] - oracle).abs() < 1e-8,
                    "({dx},{dy}) sample {i}: {} vs {oracle}",
                    ll[i]
                );
            }
        }
    }

    #[test]
    fn mi_readout_and_examples() {
        // w = 0 gives 1 nat and ρ = √(1 − e⁻²)
        let base = TridiagGaussianBase::with_w(1, 1, vec![0.0]);
        assert!((base.mi() - 1.0).abs() < 1e-15);
        let expect_rho = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((base.rho()[0] - expect_rho).abs() < 1e-14);

        // w = (ln 2, ln 3) sums to 5 nats
        let base = TridiagGaussianBase::with_w(2, 2, vec![2.0f64.ln(), 3.0f64.ln()]);
        assert!((base.mi() - 5.0).abs() < 1e-12);

        // independence limit
        let base = TridiagGaussianBase::with_w(1, 1, vec![-700.0]);
        assert!(base.mi() < 1e-300);
    }

    #[test]
    fn mi_equals_rho_route() {
        let mut rng = rng_from_seed(3);
        for _ in 0..10_000 {
            let w: f64 = rng.random_range(-8.0..W_MAX);
            let base = TridiagGaussianBase::with_w(1, 1, vec![w]);
            let r = base.rho()[0];
            // −½ ln(1−ρ²) with 1−ρ² = exp(−2 e^w), computed independently
            let one_minus_r2 = (-2.0 * w.exp()).exp();
            let direct = -0.5 * one_minus_r2.ln();
            assert!((base.mi() - direct).abs() <= 1e-12 * base.mi().max(1e-30));
            assert!(r > 0.0 && r <= 1.0);
            // ρ stays strictly below 1 wherever 1−ρ² is representable
            if w < 15.0f64.ln() {
                assert!(r < 1.0, "rho saturated at w = {w}");
            }
        }
    }

    #[test]
    fn grad_w_at_origin_is_normalization_term() {
        let base = TridiagGaussianBase::with_w(2, 2, vec![-1.0, 0.5]);
        let z = Matrix::zeros(4, 4);
        let (gw, _) = base.loglik_grad(&z, &[1.0; 4]).unwrap();
        for (j, g) in gw.iter().enumerate() {
            let expect = 4.0 * base.w()[j].exp();
            assert!((g - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn grad_matches_symbolic_two_dim() {
        // hand-derived ∂ℓ/∂ρ of the bivariate normal chained with dρ/dw
        let w = -0.7f64;
        let base = TridiagGaussianBase::with_w(1, 1, vec![w]);
        let (u, v) = (0.8, -1.3);
        let z = Matrix::from_rows(&[vec![u, v]]).unwrap();
        let (gw, gz) = base.loglik_grad(&z, &[1.0]).unwrap();

        let m = w.exp();
        let r = (1.0 - (-2.0 * m).exp()).sqrt();
        let om = 1.0 - r * r;
        let dll_drho = r / om + (u * v * (1.0 + r * r) - r * (u * u + v * v)) / (om * om);
        let drho_dw = m * (-2.0 * m).exp() / r;
        let expect = dll_drho * drho_dw;
        assert!((gw[0] - expect).abs() < 1e-10, "{} vs {expect}", gw[0]);

        let expect_gu = -(u - r * v) / om;
        let expect_gv = -(v - r * u) / om;
        assert!((gz.get(0, 0) - expect_gu).abs() < 1e-12);
        assert!((gz.get(0, 1) - expect_gv).abs() < 1e-12);
    }

    #[test]
    fn grad_matches_finite_differences() {
        let mut rng = rng_from_seed(5);
        for (dx, dy) in [(2usize, 2usize), (3, 2)] {
            let pairs = dx.min(dy);
            let w: Vec<f64> = (0..pairs).map(|_| rng.random_range(-2.0..1.0)).collect();
            let base = TridiagGaussianBase::with_w(dx, dy, w.clone());
            let mut z = Matrix::zeros(5, dx + dy);
            for v in z.data_mut() {
                *v = rng.random_range(-2.0..2.0);
            }
            let upstream: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
            let (gw, gz) = base.loglik_grad(&z, &upstream).unwrap();

            let weighted = |b: &TridiagGaussianBase, z: &Matrix| -> f64 {
                let (_, ll) = b.loglik(z).unwrap();
                ll.iter().zip(upstream.iter()).map(|(l, u)| l * u).sum()
            };
            let h = 1e-6;
            for j in 0..pairs {
                let mut wp = w.clone();
                wp[j] += h;
                let up = weighted(&TridiagGaussianBase::with_w(dx, dy, wp.clone()), &z);
                wp[j] -= 2.0 * h;
                let dn = weighted(&TridiagGaussianBase::with_w(dx, dy, wp), &z);
                let numeric = (up - dn) / (2.0 * h);
                let rel = (gw[j] - numeric).abs() / gw[j].abs().max(numeric.abs()).max(1.0);
                assert!(rel < 1e-4, "w[{j}]: {} vs {numeric}", gw[j]);
            }
            for i in 0..2 {
                for j in 0..dx + dy {
                    let orig = z.get(i, j);
                    z.set(i, j, orig + h);
                    let up = weighted(&base, &z);
                    z.set(i, j, orig - h);
                    let dn = weighted(&base, &z);
                    z.set(i, j, orig);
                    let numeric = (up - dn) / (2.0 * h);
                    let rel =
                        (gz.get(i, j) - numeric).abs() / numeric.abs().max(1.0);
                    assert!(rel < 1e-4, "z[{i}][{j}]");
                }
            }
        }
    }

    #[test]
    fn whitener_identity_random_rho() {
        let mut rng = rng_from_seed(9);
        for _ in 0..50 {
            let dx = rng.random_range(1..8usize);
            let dy = rng.random_range(1..8usize);
            let pairs = dx.min(dy);
            let rho: Vec<f64> = (0..pairs).map(|_| rng.random_range(0.0..0.999)).collect();
            let wh = SparseWhitener::from_rho(dx, dy, &rho);
            let dense = wh.as_dense();
            // W symmetric
            assert!(dense.sub(&dense.transpose()).max_abs() == 0.0);
            // W Σ W = I
            let mut sigma = Matrix::identity(dx + dy);
            for (j, r) in rho.iter().enumerate() {
                sigma.set(j, dx + j, *r);
                sigma.set(dx + j, j, *r);
            }
            let prod = dense.matmul(&sigma).matmul(&dense);
            let err = prod.sub(&Matrix::identity(dx + dy)).max_abs();
            assert!(err < 1e-10, "whitener identity error {err}");
        }
    }

    #[test]
    fn sampling_statistics() {
        let mut rng = rng_from_seed(100);
        // ρ = 0: marginals are standard normal (KS on Φ(u))
        let base = TridiagGaussianBase::with_w(1, 1, vec![-40.0]);
        let z = base.sample(10_000, &mut rng);
        let u: Vec<f64> = (0..z.rows()).map(|i| std_normal_cdf(z.get(i, 0))).collect();
        let (_, p) = ks_uniform(&u);
        assert!(p > 0.001, "KS p-value {p}");

        // ρ = 0.9: sample cross-correlation within 0.01 at n = 1e5
        let m = -0.5 * (1.0f64 - 0.81).ln();
        let base = TridiagGaussianBase::with_w(1, 1, vec![m.ln()]);
        assert!((base.rho()[0] - 0.9).abs() < 1e-12);
        let z = base.sample(100_000, &mut rng);
        let c = covariance(&z);
        let corr = c.get(0, 1) / (c.get(0, 0) * c.get(1, 1)).sqrt();
        assert!((corr - 0.9).abs() < 0.01, "corr {corr}");

        // zero mean within 4/√n
        let mean = mean_vec(&z);
        let bound = 4.0 / (z.rows() as f64).sqrt();
        for m in mean {
            assert!(m.abs() < bound);
        }
    }

    #[test]
    fn full_gaussian_updates() {
        let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![3.0, 2.0]]).unwrap();
        let mut exact = FullGaussianBase::new(2, 0.1);
        exact.update(&z, UpdateMode::Exact);
        assert_eq!(exact.mean, vec![2.0, 1.0]);
        assert!((exact.cov.get(0, 0) - 1.0).abs() < 1e-12); // biased: ((1)²+(1)²)/2
        assert!((exact.cov.get(0, 1) - 1.0).abs() < 1e-12);

        // γ = 1 EMA equals exact
        let mut ema1 = FullGaussianBase::new(2, 1.0);
        ema1.update(&z, UpdateMode::Ema);
        assert_eq!(ema1.mean, exact.mean);
        assert_eq!(ema1.cov, exact.cov);

        // two equal batches at γ = 0.5 keep the batch mean
        let mut ema = FullGaussianBase::new(2, 0.5);
        ema.update(&z, UpdateMode::Ema);
        ema.update(&z, UpdateMode::Ema);
        assert!((ema.mean[0] - 2.0).abs() < 1e-12);
        assert!((ema.mean[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_gaussian_loglik_known_points() {
        let mut base = FullGaussianBase::new(1, 0.1);
        base.mean = vec![0.0];
        base.cov = Matrix::identity(1);
        let z = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let (_, ll) = base.loglik(&z).unwrap();
        assert!((ll[0] + 0.5 * (LN_2PI + 1.0)).abs() < 1e-9);

        // at the mode: −½(d log 2π + logdet), gradient zero
        let mut base = FullGaussianBase::new(2, 0.1);
        base.mean = vec![0.5, -1.0];
        base.cov = Matrix::from_vec(2, 2, vec![2.0, 0.3, 0.3, 1.0]).unwrap();
        let z = Matrix::from_rows(&[vec![0.5, -1.0]]).unwrap();
        let (_, ll) = base.loglik(&z).unwrap();
        let (_, logdet) = cholesky_logdet(&base.cov).unwrap();
        assert!((ll[0] + 0.5 * (2.0 * LN_2PI + logdet)).abs() < 1e-7);
        let g = base.loglik_grad(&z, &[1.0]).unwrap();
        assert!(g.max_abs() < 1e-9);
    }

    #[test]
    fn full_gaussian_matches_eigen_oracle() {
        let mut rng = rng_from_seed(8);
        let mut a = Matrix::zeros(3, 3);
        for v in a.data_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let mut cov = a.matmul_tn(&a);
        cov.add_scaled_identity(0.5);
        let mut base = FullGaussianBase::new(3, 0.1);
        base.mean = vec![0.1, -0.2, 0.3];
        base.cov = cov.clone();

        // oracle: density through the eigendecomposition route
        let eig = sym_eigen(&cov).unwrap();
        let inv = eig.apply_spectral(|l| 1.0 / l);
        let logdet: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
        let z = Matrix::from_rows(&[vec![1.0, 0.5, -0.7]]).unwrap();
        let centered: Vec<f64> =
            z.row(0).iter().zip(base.mean.iter()).map(|(a, b)| a - b).collect();
        let q: f64 = inv
            .mul_vec(&centered)
            .iter()
            .zip(centered.iter())
            .map(|(a, b)| a * b)
            .sum();
        let oracle = -0.5 * (3.0 * LN_2PI + logdet + q);
        let (_, ll) = base.loglik(&z).unwrap();
        assert!((ll[0] - oracle).abs() < 1e-8, "{} vs {oracle}", ll[0]);
    }

    /// The set log-likelihood with ML-fitted moments is invariant under
    /// invertible affine maps once the Jacobian correction is added.
    #[test]
    fn set_loglik_affine_invariance() {
        let mut rng = rng_from_seed(33);
        let n = 60;
        let d = 3;
        let mut z = Matrix::zeros(n, d);
        for v in z.data_mut() {
            *v = rng.random_range(-1.5..1.5);
        }
        let fit_loglik = |s: &Matrix| -> f64 {
            let mut b = FullGaussianBase::new(d, 1.0);
            b.update(s, UpdateMode::Exact);
            b.loglik(s).unwrap().0
        };
        let base_ll = fit_loglik(&z);
        for trial in 0..5 {
            let mut a = Matrix::zeros(d, d);
            for v in a.data_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            a.add_scaled_identity(2.0); // keep it comfortably invertible
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut mapped = z.matmul(&a.transpose());
            for i in 0..n {
                for (v, off) in mapped.row_mut(i).iter_mut().zip(b.iter()) {
                    *v += off;
                }
            }
            let log_abs_det: f64 =
                svd(&a).unwrap().singular_values.iter().map(|s| s.ln()).sum();
            let mapped_ll = fit_loglik(&mapped) + n as f64 * log_abs_det;
            assert!(
                (mapped_ll - base_ll).abs() < 1e-8 * base_ll.abs().max(1.0),
                "trial {trial}: {mapped_ll} vs {base_ll}"
            );
        }
    }
}
