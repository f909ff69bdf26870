use crate::error::{Error, Result};
use crate::numerics::stats::{covariance, mean_vec};
use crate::numerics::{cholesky_logdet, ridge_regularized, svd, sym_eigen, Matrix};

/// Largest admissible canonical correlation; caps the per-component MI
/// instead of letting exactly collinear data produce an infinite estimate.
const RHO_CAP: f64 = 1.0 - 1e-12;

fn block(m: &Matrix, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
    let mut out = Matrix::zeros(r1 - r0, c1 - c0);
    for i in r0..r1 {
        for j in c0..c1 {
            out.set(i - r0, j - c0, m.get(i, j));
        }
    }
    out
}

/// Log-determinant of a sample covariance. The ridge is a fallback: plain
/// Cholesky keeps the closed form exactly affine-invariant on healthy data,
/// and near-singular covariances (high MI, manifold data) get regularized
/// instead of failing.
fn logdet_ridged(s: &Matrix) -> Result<f64> {
    match cholesky_logdet(s) {
        Ok((_, ld)) => Ok(ld),
        Err(Error::NotPositiveDefinite { .. }) => Ok(cholesky_logdet(&ridge_regularized(s))?.1),
        Err(e) => Err(e),
    }
}

/// The closed-form Gaussian MI of sample moments:
/// `½·[log det Σ̂_xx + log det Σ̂_yy − log det Σ̂]`, clamped at zero.
/// Exact for jointly Gaussian data, a lower bound once only the marginals
/// are Gaussian.
pub fn estimate_gaussian_closed_form(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::shape("paired samples must have equal counts".to_string()));
    }
    let d = x.cols() + y.cols();
    let need = d + 2;
    if x.rows() < need {
        return Err(Error::InsufficientSamples { got: x.rows(), need });
    }
    let joint = x.hcat(y);
    let sigma = covariance(&joint);
    let sxx = block(&sigma, 0, x.cols(), 0, x.cols());
    let syy = block(&sigma, x.cols(), d, x.cols(), d);
    let mi = 0.5 * (logdet_ridged(&sxx)? + logdet_ridged(&syy)? - logdet_ridged(&sigma)?);
    Ok(mi.max(0.0))
}

/// Invertible affine map `v ↦ L·v + offset`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub linear: Matrix,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, batch: &Matrix) -> Matrix {
        let mut out = batch.matmul_nt(&self.linear);
        for i in 0..out.rows() {
            for (v, o) in out.row_mut(i).iter_mut().zip(self.offset.iter()) {
                *v += o;
            }
        }
        out
    }
}

/// Canonical correlation analysis of the sample moments.
#[derive(Debug, Clone)]
pub struct CcaResult {
    pub x_map: AffineMap,
    pub y_map: AffineMap,
    /// Canonical correlations, descending in [0, 1).
    pub rho: Vec<f64>,
    /// `−½ Σ log(1 − ρ_j²)`, clamped at zero.
    pub mi: f64,
}

/// Affine maps that whiten each variable and align the cross block:
/// `A = Σ̂_xx^{-1/2}`, `B = Σ̂_yy^{-1/2}`, SVD `A Σ̂_xy B = U R Vᵀ`, maps
/// `Uᵀ A`, `Vᵀ B`. The transformed joint covariance has identity diagonal
/// blocks and `diag(ρ)` in the cross block.
pub fn cca_tridiagonalize(x: &Matrix, y: &Matrix) -> Result<CcaResult> {
    if x.rows() != y.rows() {
        return Err(Error::shape("paired samples must have equal counts".to_string()));
    }
    let d = x.cols() + y.cols();
    if x.rows() < d + 2 {
        return Err(Error::InsufficientSamples { got: x.rows(), need: d + 2 });
    }
    let joint = x.hcat(y);
    let sigma = covariance(&joint);
    let sxx = block(&sigma, 0, x.cols(), 0, x.cols());
    let syy = block(&sigma, x.cols(), d, x.cols(), d);
    let sxy = block(&sigma, 0, x.cols(), x.cols(), d);

    let inv_sqrt = |s: &Matrix| -> Result<Matrix> {
        let mut eig = sym_eigen(s)?;
        if eig.eigenvalues.last().is_some_and(|&min| min <= 0.0) {
            eig = sym_eigen(&ridge_regularized(s))?;
            if let Some(&min) = eig.eigenvalues.last() {
                if min <= 0.0 {
                    return Err(Error::NotPositiveDefinite { index: 0, pivot: min });
                }
            }
        }
        Ok(eig.apply_spectral(|l| 1.0 / l.sqrt()))
    };
    let a = inv_sqrt(&sxx)?;
    let b = inv_sqrt(&syy)?;
    let c = a.matmul(&sxy).matmul(&b); // B symmetric
    let dec = svd(&c)?;
    let rho: Vec<f64> = dec.singular_values.iter().map(|&s| s.min(RHO_CAP)).collect();
    let mi: f64 = rho.iter().map(|r| -0.5 * (1.0 - r * r).ln()).sum();

    let mean_x = mean_vec(x);
    let mean_y = mean_vec(y);
    let lx = dec.u.transpose().matmul(&a);
    let ly = dec.v.transpose().matmul(&b);
    let off = |l: &Matrix, m: &[f64]| -> Vec<f64> { l.mul_vec(m).iter().map(|v| -v).collect() };
    Ok(CcaResult {
        x_map: AffineMap { offset: off(&lx, &mean_x), linear: lx },
        y_map: AffineMap { offset: off(&ly, &mean_y), linear: ly },
        rho,
        mi: mi.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::synthetic::{gen_correlated_gaussian, Allocation};
    use rand::Rng;

    #[test]
    fn independent_data_near_zero() {
        let pair = gen_correlated_gaussian(1, 0.0, &Allocation::Equal, 100_000, 1).unwrap();
        let mi = estimate_gaussian_closed_form(&pair.x, &pair.y).unwrap();
        assert!(mi < 0.05, "mi = {mi}");
    }

    #[test]
    fn bivariate_half_correlation() {
        // −½ log(0.75) ≈ 0.143841
        let m = -0.5 * 0.75f64.ln();
        let alloc = Allocation::Custom(vec![m]);
        let pair = gen_correlated_gaussian(1, m, &alloc, 200_000, 2).unwrap();
        let mi = estimate_gaussian_closed_form(&pair.x, &pair.y).unwrap();
        assert!((mi - m).abs() < 0.01, "mi = {mi} expect {m}");
    }

    #[test]
    fn affine_invariance_per_variable() {
        let mut rng = rng_from_seed(3);
        let pair = gen_correlated_gaussian(3, 2.0, &Allocation::Equal, 500, 4).unwrap();
        let base = estimate_gaussian_closed_form(&pair.x, &pair.y).unwrap();
        let mut a = Matrix::zeros(3, 3);
        for v in a.data_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        a.add_scaled_identity(2.0);
        let map = AffineMap { linear: a, offset: vec![0.3, -1.0, 2.0] };
        let mapped_x = map.apply(&pair.x);
        let mi = estimate_gaussian_closed_form(&mapped_x, &pair.y).unwrap();
        assert!((mi - base).abs() < 1e-10, "{mi} vs {base}");
    }

    #[test]
    fn insufficient_samples_rejected() {
        let x = Matrix::zeros(4, 2);
        let y = Matrix::zeros(4, 2);
        assert!(matches!(
            estimate_gaussian_closed_form(&x, &y),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn cca_on_whitened_independent_data() {
        let pair = gen_correlated_gaussian(3, 0.0, &Allocation::Equal, 50_000, 5).unwrap();
        let cca = cca_tridiagonalize(&pair.x, &pair.y).unwrap();
        for r in &cca.rho {
            assert!(*r < 0.05, "rho {r}");
        }
        assert!(cca.mi < 0.01);
    }

    #[test]
    fn cca_recovers_componentwise_correlations() {
        // data built with known ρ per component; canonical correlations are
        // exactly those (up to sampling error), independent of mixing
        let pair = gen_correlated_gaussian(2, 1.0, &Allocation::Custom(vec![0.7, 0.3]), 100_000, 6)
            .unwrap();
        let want_rho_hi = (1.0f64 - (-2.0f64 * 0.7).exp()).sqrt();
        let want_rho_lo = (1.0f64 - (-2.0f64 * 0.3).exp()).sqrt();
        // mix X with a fixed invertible matrix; MI and ρ are unchanged
        let mix = AffineMap {
            linear: Matrix::from_vec(2, 2, vec![1.0, 0.4, -0.3, 0.9]).unwrap(),
            offset: vec![1.0, -2.0],
        };
        let mixed_x = mix.apply(&pair.x);
        let cca = cca_tridiagonalize(&mixed_x, &pair.y).unwrap();
        assert!((cca.rho[0] - want_rho_hi).abs() < 0.01, "{} vs {want_rho_hi}", cca.rho[0]);
        assert!((cca.rho[1] - want_rho_lo).abs() < 0.01, "{} vs {want_rho_lo}", cca.rho[1]);
    }

    #[test]
    fn cca_postcondition_tridiagonal_covariance() {
        let pair = gen_correlated_gaussian(3, 1.5, &Allocation::Equal, 20_000, 7).unwrap();
        let cca = cca_tridiagonalize(&pair.x, &pair.y).unwrap();
        let tx = cca.x_map.apply(&pair.x);
        let ty = cca.y_map.apply(&pair.y);
        let joint = tx.hcat(&ty);
        let c = crate::numerics::stats::covariance(&joint);
        let d = 3;
        for i in 0..2 * d {
            for j in 0..2 * d {
                let expect = if i == j {
                    1.0
                } else if i + d == j || j + d == i {
                    cca.rho[i.min(j)]
                } else {
                    0.0
                };
                assert!(
                    (c.get(i, j) - expect).abs() < 1e-8,
                    "cov[{i}][{j}] = {} expect {expect}",
                    c.get(i, j)
                );
            }
        }
    }

    #[test]
    fn cca_mi_equals_closed_form() {
        for seed in [8u64, 9, 10] {
            let pair = gen_correlated_gaussian(4, 3.0, &Allocation::Equal, 5_000, seed).unwrap();
            let cca = cca_tridiagonalize(&pair.x, &pair.y).unwrap();
            let cf = estimate_gaussian_closed_form(&pair.x, &pair.y).unwrap();
            assert!((cca.mi - cf).abs() < 1e-8, "cca {} vs closed form {cf}", cca.mi);
        }
    }
}
