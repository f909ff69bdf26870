use crate::error::{Error, Result};
use crate::numerics::{digamma, log_gamma};
use crate::rng::{rng_from_seed, Rng};
use crate::synthetic::dataset::{FamilyParams, LabeledDatasetPair};
use crate::synthetic::gaussian::{sample_componentwise_gaussian, Allocation, ComponentMiAllocation};
use rand_distr::StandardNormal;

/// MI correction picked up when a Gaussian core is divided by a shared
/// χ²-derived magnitude:
///
/// `c(k, n, m) = f(k) + f(k+n+m) − f(k+n) − f(k+m)`,
/// `f(x) = log Γ(x/2) − (x/2)·ψ(x/2)`,
///
/// with `k` the degrees of freedom and `n`, `m` the two dimensions. The
/// shared magnitude carries information even when the core is independent,
/// so `c > 0`.
pub fn student_correction(k: u32, n_dim: usize, m_dim: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("degrees of freedom must be >= 1"));
    }
    if n_dim < 1 || m_dim < 1 {
        return Err(Error::domain("dimensions must be >= 1"));
    }
    let f = |x: f64| -> Result<f64> { Ok(log_gamma(x / 2.0)? - (x / 2.0) * digamma(x / 2.0)?) };
    let k = k as f64;
    let (n, m) = (n_dim as f64, m_dim as f64);
    Ok(f(k)? + f(k + n + m)? - f(k + n)? - f(k + m)?)
}

/// χ²_k via the sum of k squared standard normals (exact for integer k).
pub(crate) fn sample_chi2(k: u32, rng: &mut Rng) -> f64 {
    let mut acc = 0.0;
    for _ in 0..k {
        let z: f64 = rand::Rng::sample(rng, StandardNormal);
        acc += z * z;
    }
    acc
}

/// Multivariate Student pair: a componentwise-correlated Gaussian core with
/// MI `κ = target − c(k, d_x, d_y)`, divided by the shared `√(U/k)` with
/// `U ~ χ²_k`. The resulting MI is exactly `κ + c = target`.
pub fn gen_student(
    d_x: usize,
    d_y: usize,
    k: u32,
    target_mi: f64,
    n: usize,
    seed: u64,
) -> Result<LabeledDatasetPair> {
    let correction = student_correction(k, d_x, d_y)?;
    let kappa = target_mi - correction;
    if kappa < 0.0 {
        return Err(Error::TargetBelowCorrection { target: target_mi, correction });
    }
    let pairs = d_x.min(d_y);
    let alloc = ComponentMiAllocation::resolve(&Allocation::Equal, pairs, kappa)?;
    let rho = alloc.correlations();
    let mut rng = rng_from_seed(seed);
    let (mut x, mut y) = sample_componentwise_gaussian(d_x, d_y, &rho, n, &mut rng);
    for i in 0..n {
        let u = sample_chi2(k, &mut rng);
        let scale = (k as f64 / u).sqrt();
        for v in x.row_mut(i) {
            *v *= scale;
        }
        for v in y.row_mut(i) {
            *v *= scale;
        }
    }
    Ok(LabeledDatasetPair {
        x,
        y,
        true_mi: target_mi,
        params: FamilyParams::Student { dof: k, rho, kappa, correction },
        mappings: Vec::new(),
        seed,
    })
}
