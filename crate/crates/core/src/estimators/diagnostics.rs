use crate::base::LatentDensity;
use crate::error::{Error, Result};
use crate::numerics::stats::covariance;
use crate::numerics::{cholesky_logdet, ridge_regularized, Matrix};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Entropy–cross-entropy lower bound on `KL(p ‖ q)` from latent samples:
/// `max(0, −⟨log q(z)⟩ − h(N(m̂_z, Σ̂_z)))`, with the entropy taken at the
/// sample moments. Zero whenever the base moments match the sample moments,
/// which is exactly the fitted-Gaussian case; reported as a diagnostic
/// anyway since a strictly positive value flags a mis-fitted base.
pub fn kld_lower_bound(z: &Matrix, base: &dyn LatentDensity) -> Result<f64> {
    if z.rows() == 0 {
        return Err(Error::domain("kld bound needs a nonempty batch"));
    }
    if z.cols() != base.dim() {
        return Err(Error::shape("kld bound: latent width mismatch".to_string()));
    }
    let logq = base.log_density(z)?;
    let cross_entropy = -logq.iter().sum::<f64>() / z.rows() as f64;
    let cov = covariance(z);
    let (_, logdet) = cholesky_logdet(&ridge_regularized(&cov))?;
    let gaussian_entropy = 0.5 * z.cols() as f64 * (LN_2PI + 1.0) + 0.5 * logdet;
    Ok((cross_entropy - gaussian_entropy).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::{FullGaussianBase, UpdateMode};
    use crate::rng::rng_from_seed;
    use rand_distr::StandardNormal;

    fn normal_batch(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = rng_from_seed(seed);
        let mut z = Matrix::zeros(n, d);
        for v in z.data_mut() {
            *v = rand::Rng::sample(&mut rng, StandardNormal);
        }
        z
    }

    #[test]
    fn zero_for_exactly_fitted_gaussian() {
        let z = normal_batch(2_000, 3, 1);
        let mut base = FullGaussianBase::new(3, 1.0);
        base.update(&z, UpdateMode::Exact);
        let bound = kld_lower_bound(&z, &base).unwrap();
        assert!(bound < 1e-8, "bound = {bound}");
    }

    #[test]
    fn wrong_variance_detected_at_analytic_level() {
        // q = N(0, 2I) against standard normal data: per dimension the
        // cross-entropy is ½log(4π) + ¼ and the entropy is ½log(2πe),
        // so the bound approaches ½log2 − ¼ per dimension.
        let d = 4;
        let z = normal_batch(50_000, d, 2);
        let mut base = FullGaussianBase::new(d, 1.0);
        let mut wide = crate::numerics::Matrix::identity(d);
        for i in 0..d {
            wide.set(i, i, 2.0);
        }
        base.cov = wide;
        let bound = kld_lower_bound(&z, &base).unwrap();
        let analytic = d as f64 * (0.5 * 2.0f64.ln() - 0.25);
        assert!(
            (bound - analytic).abs() < 0.05,
            "bound {bound} vs analytic {analytic}"
        );
    }

    #[test]
    fn never_negative() {
        let z = normal_batch(500, 2, 3);
        // a base that fits better than the Gaussian entropy bound can see
        let mut base = FullGaussianBase::new(2, 1.0);
        base.update(&z, UpdateMode::Exact);
        for _ in 0..5 {
            let bound = kld_lower_bound(&z, &base).unwrap();
            assert!(bound >= 0.0);
        }
    }
}
