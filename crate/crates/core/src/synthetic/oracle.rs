use crate::error::{Error, Result};
use crate::numerics::log_gamma;
use crate::rng::rng_from_seed;
use crate::synthetic::dataset::FamilyParams;
use crate::synthetic::smoothed::smoothed_uniform_py;
use crate::synthetic::student::sample_chi2;
use rand_distr::StandardNormal;

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Families with tractable joint and marginal densities, accepted by the
/// Monte-Carlo pointwise-MI oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleFamily {
    CorrelatedGaussian { rho: Vec<f64> },
    Student { dof: u32, dim_x: usize, dim_y: usize, rho: Vec<f64> },
    SmoothedUniform { eps: Vec<f64> },
}

impl OracleFamily {
    /// Oracle description of a generated dataset. Mappings are irrelevant:
    /// MI is invariant, so the pre-map family labels the mapped data too.
    pub fn from_params(params: &FamilyParams, dim_x: usize, dim_y: usize) -> Result<Self> {
        match params {
            FamilyParams::CorrelatedGaussian { rho } => {
                Ok(OracleFamily::CorrelatedGaussian { rho: rho.clone() })
            }
            FamilyParams::Student { dof, rho, .. } => Ok(OracleFamily::Student {
                dof: *dof,
                dim_x,
                dim_y,
                rho: rho.clone(),
            }),
            FamilyParams::SmoothedUniform { eps } => {
                Ok(OracleFamily::SmoothedUniform { eps: eps.clone() })
            }
        }
    }
}

/// Monte-Carlo average of the pointwise mutual information
/// `log p(x,y) − log p(x) − log p(y)` over fresh samples from the family.
/// Returns the estimate and its standard error.
pub fn mc_pmi_oracle(family: &OracleFamily, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
    if n_mc == 0 {
        return Err(Error::domain("oracle needs at least one sample"));
    }
    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    match family {
        OracleFamily::CorrelatedGaussian { rho } => {
            for r in rho {
                if !(0.0..1.0).contains(r) {
                    return Err(Error::domain("oracle requires rho in [0,1)"));
                }
            }
            for _ in 0..n_mc {
                let mut pmi = 0.0;
                for &r in rho {
                    let n1: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                    let n2: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                    let u = n1;
                    let v = r * n1 + (1.0 - r * r).sqrt() * n2;
                    pmi += bivariate_gaussian_pmi(u, v, r);
                }
                sum += pmi;
                sum_sq += pmi * pmi;
            }
        }
        OracleFamily::Student { dof, dim_x, dim_y, rho } => {
            let (dx, dy) = (*dim_x, *dim_y);
            let pairs = dx.min(dy);
            if rho.len() != pairs {
                return Err(Error::shape("oracle: rho length != min(dim_x, dim_y)".to_string()));
            }
            let k = *dof as f64;
            let d = (dx + dy) as f64;
            // log normalization constants of the three Student densities
            let joint_logdet: f64 = rho.iter().map(|r| (1.0 - r * r).ln()).sum();
            let c_joint = ln_t_const(k, d)? - 0.5 * joint_logdet;
            let c_x = ln_t_const(k, dx as f64)?;
            let c_y = ln_t_const(k, dy as f64)?;
            for _ in 0..n_mc {
                let mut x = vec![0.0; dx];
                let mut y = vec![0.0; dy];
                for j in 0..pairs {
                    let n1: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                    let n2: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                    x[j] = n1;
                    y[j] = rho[j] * n1 + (1.0 - rho[j] * rho[j]).sqrt() * n2;
                }
                for xv in x.iter_mut().skip(pairs) {
                    *xv = rand::Rng::sample(&mut rng, StandardNormal);
                }
                for yv in y.iter_mut().skip(pairs) {
                    *yv = rand::Rng::sample(&mut rng, StandardNormal);
                }
                let scale = (k / sample_chi2(*dof, &mut rng)).sqrt();
                for v in x.iter_mut().chain(y.iter_mut()) {
                    *v *= scale;
                }
                // quadratic forms under the pair-structured scale matrix
                let mut q_joint = 0.0;
                for j in 0..pairs {
                    let (u, v, r) = (x[j], y[j], rho[j]);
                    q_joint += (u * u + v * v - 2.0 * r * u * v) / (1.0 - r * r);
                }
                for &u in &x[pairs..] {
                    q_joint += u * u;
                }
                for &v in &y[pairs..] {
                    q_joint += v * v;
                }
                let q_x: f64 = x.iter().map(|v| v * v).sum();
                let q_y: f64 = y.iter().map(|v| v * v).sum();
                let lp_joint = c_joint - 0.5 * (k + d) * (1.0 + q_joint / k).ln();
                let lp_x = c_x - 0.5 * (k + dx as f64) * (1.0 + q_x / k).ln();
                let lp_y = c_y - 0.5 * (k + dy as f64) * (1.0 + q_y / k).ln();
                let pmi = lp_joint - lp_x - lp_y;
                sum += pmi;
                sum_sq += pmi * pmi;
            }
        }
        OracleFamily::SmoothedUniform { eps } => {
            for e in eps {
                if !(*e > 0.0) {
                    return Err(Error::domain("oracle requires positive smoothing widths"));
                }
            }
            for _ in 0..n_mc {
                let mut pmi = 0.0;
                for &e in eps {
                    let x: f64 = rand::Rng::random(&mut rng);
                    let z: f64 = rand::Rng::random_range(&mut rng, -e..e);
                    let y = x + z;
                    // p(x,y)/p(x) = p_Z(y−x) = 1/(2ε) on the support
                    pmi += -(2.0 * e).ln() - smoothed_uniform_py(y, e).ln();
                }
                sum += pmi;
                sum_sq += pmi * pmi;
            }
        }
    }
    let n = n_mc as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let se = (var / n).sqrt();
    Ok((mean, se))
}

/// Pointwise MI of a unit-variance bivariate Gaussian at correlation ρ.
fn bivariate_gaussian_pmi(u: f64, v: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let om = 1.0 - r * r;
    -0.5 * om.ln() - (r * r * (u * u + v * v) - 2.0 * r * u * v) / (2.0 * om)
}

/// log of the multivariate-t normalization with identity scale:
/// `Γ((k+d)/2) / [Γ(k/2)·(kπ)^{d/2}]`.
fn ln_t_const(k: f64, d: f64) -> Result<f64> {
    Ok(log_gamma((k + d) / 2.0)? - log_gamma(k / 2.0)? - 0.5 * d * (k.ln() + LN_PI))
}
