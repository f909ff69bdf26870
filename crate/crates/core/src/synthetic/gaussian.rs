use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::{rng_from_seed, Rng};
use crate::synthetic::dataset::{FamilyParams, LabeledDatasetPair};
use rand_distr::StandardNormal;

/// How a target MI is split across the paired components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    Equal,
    Custom(Vec<f64>),
}

/// Per-component MI values `I_j ≥ 0` summing to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMiAllocation {
    values: Vec<f64>,
}

impl ComponentMiAllocation {
    pub fn resolve(alloc: &Allocation, components: usize, target: f64) -> Result<Self> {
        if target < 0.0 {
            return Err(Error::domain("target MI must be nonnegative"));
        }
        let values = match alloc {
            Allocation::Equal => vec![target / components as f64; components],
            Allocation::Custom(v) => {
                if v.len() != components {
                    return Err(Error::shape(format!(
                        "allocation has {} entries for {} components",
                        v.len(),
                        components
                    )));
                }
                if v.iter().any(|&x| x < 0.0) {
                    return Err(Error::domain("allocation entries must be nonnegative"));
                }
                v.clone()
            }
        };
        let sum: f64 = values.iter().sum();
        if (sum - target).abs() > 1e-12 * target.max(1.0) {
            return Err(Error::domain(format!(
                "allocation sums to {sum}, target is {target}"
            )));
        }
        Ok(ComponentMiAllocation { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Invert the per-component Gaussian MI: `ρ_j = √(1 − e^{−2 I_j})`.
    pub fn correlations(&self) -> Vec<f64> {
        self.values.iter().map(|&i| (-((-2.0 * i).exp_m1())).sqrt()).collect()
    }
}

/// Sample jointly Gaussian pairs where component `j` of X correlates with
/// component `j` of Y at `ρ_j`; all marginals standard normal.
pub(crate) fn sample_componentwise_gaussian(
    d_x: usize,
    d_y: usize,
    rho: &[f64],
    n: usize,
    rng: &mut Rng,
) -> (Matrix, Matrix) {
    let pairs = d_x.min(d_y);
    assert_eq!(rho.len(), pairs);
    let mut x = Matrix::zeros(n, d_x);
    let mut y = Matrix::zeros(n, d_y);
    for i in 0..n {
        for j in 0..pairs {
            let n1: f64 = rand::Rng::sample(rng, StandardNormal);
            let n2: f64 = rand::Rng::sample(rng, StandardNormal);
            x.set(i, j, n1);
            y.set(i, j, rho[j] * n1 + (1.0 - rho[j] * rho[j]).sqrt() * n2);
        }
        for j in pairs..d_x {
            x.set(i, j, rand::Rng::sample(rng, StandardNormal));
        }
        for j in pairs..d_y {
            y.set(i, j, rand::Rng::sample(rng, StandardNormal));
        }
    }
    (x, y)
}

/// Correlated Gaussian benchmark: `d`-dimensional X and Y with exact MI.
pub fn gen_correlated_gaussian(
    d: usize,
    target_mi: f64,
    allocation: &Allocation,
    n: usize,
    seed: u64,
) -> Result<LabeledDatasetPair> {
    let alloc = ComponentMiAllocation::resolve(allocation, d, target_mi)?;
    let rho = alloc.correlations();
    let mut rng = rng_from_seed(seed);
    let (x, y) = sample_componentwise_gaussian(d, d, &rho, n, &mut rng);
    Ok(LabeledDatasetPair {
        x,
        y,
        true_mi: target_mi,
        params: FamilyParams::CorrelatedGaussian { rho },
        mappings: Vec::new(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats::covariance;

    #[test]
    fn zero_target_is_independent_standard_normal() {
        let pair = gen_correlated_gaussian(2, 0.0, &Allocation::Equal, 20_000, 7).unwrap();
        assert_eq!(pair.true_mi, 0.0);
        match &pair.params {
            FamilyParams::CorrelatedGaussian { rho } => assert!(rho.iter().all(|&r| r == 0.0)),
            _ => panic!("wrong family"),
        }
        let joint = pair.x.hcat(&pair.y);
        let c = covariance(&joint);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((c.get(i, j) - expect).abs() < 0.05);
            }
        }
    }

    #[test]
    fn inversion_formula_matches_direct_evaluation() {
        // d = 1, 1 nat: ρ = √(1 − e⁻²)
        let pair = gen_correlated_gaussian(1, 1.0, &Allocation::Equal, 10, 7).unwrap();
        let rho = match &pair.params {
            FamilyParams::CorrelatedGaussian { rho } => rho[0],
            _ => unreachable!(),
        };
        let direct = (1.0 - (-2.0f64).exp()).sqrt();
        assert!((rho - direct).abs() < 1e-15);

        // d = 16 at 10 nats, equal split: every component at I = 0.625
        let pair = gen_correlated_gaussian(16, 10.0, &Allocation::Equal, 10, 7).unwrap();
        let expect = (1.0 - (-1.25f64).exp()).sqrt();
        match &pair.params {
            FamilyParams::CorrelatedGaussian { rho } => {
                for r in rho {
                    assert!((r - expect).abs() < 1e-15);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn custom_allocation_validated() {
        let ok = Allocation::Custom(vec![0.2, 0.8]);
        assert!(gen_correlated_gaussian(2, 1.0, &ok, 10, 1).is_ok());
        let bad_sum = Allocation::Custom(vec![0.2, 0.2]);
        assert!(gen_correlated_gaussian(2, 1.0, &bad_sum, 10, 1).is_err());
        let bad_len = Allocation::Custom(vec![1.0]);
        assert!(gen_correlated_gaussian(2, 1.0, &bad_len, 10, 1).is_err());
        let negative = Allocation::Custom(vec![-0.5, 1.5]);
        assert!(gen_correlated_gaussian(2, 1.0, &negative, 10, 1).is_err());
    }

    #[test]
    fn seed_determinism() {
        let a = gen_correlated_gaussian(3, 2.0, &Allocation::Equal, 100, 42).unwrap();
        let b = gen_correlated_gaussian(3, 2.0, &Allocation::Equal, 100, 42).unwrap();
        let c = gen_correlated_gaussian(3, 2.0, &Allocation::Equal, 100, 43).unwrap();
        for (va, vb) in a.x.data().iter().zip(b.x.data().iter()) {
            assert_eq!(va.to_bits(), vb.to_bits());
        }
        assert_ne!(a.x.data()[0].to_bits(), c.x.data()[0].to_bits());
    }
}
