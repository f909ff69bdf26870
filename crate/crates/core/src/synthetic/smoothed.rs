use crate::error::{Error, Result};
use crate::numerics::lambert_w0;
use crate::rng::rng_from_seed;
use crate::synthetic::dataset::{FamilyParams, LabeledDatasetPair};

/// Per-component MI floor: `ε = (4I)⁻¹` diverges at I → 0, so requests below
/// this are clamped and reflected in the exact label.
pub const MI_FLOOR: f64 = 1e-4;

/// MI of the smoothed-uniform pair `X ~ U[0,1]`, `Y = X + U[−ε, ε]`:
/// `ε − log 2ε` below ε = 1/2 and `(4ε)⁻¹` above.
pub fn smoothed_uniform_mi(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("smoothing width must be positive, got {eps}")));
    }
    Ok(if eps < 0.5 { eps - (2.0 * eps).ln() } else { 0.25 / eps })
}

/// Inverse of `smoothed_uniform_mi`. MI above 1/2 lands on the ε < 1/2
/// branch and inverts through the principal Lambert W:
/// `ε = −W₀(−½·e^{−I})`; MI at or below 1/2 inverts the flat branch as
/// `ε = (4I)⁻¹`. (The forward map sends ε < ½ to MI > ½, so this is the
/// round-trip-consistent assignment.)
pub fn smoothed_uniform_eps(mi: f64) -> Result<f64> {
    if !(mi > 0.0) || !mi.is_finite() {
        return Err(Error::domain(format!("MI must be positive, got {mi}")));
    }
    if mi > 0.5 {
        Ok(-lambert_w0(-0.5 * (-mi).exp())?)
    } else {
        Ok(0.25 / mi)
    }
}

/// Smoothed-uniform benchmark: `d` independent components, each a pair
/// `(X_j, X_j + Z_j)` with per-component MI `target/d` (clamped at the
/// floor). The label is the exact sum of the per-component values.
pub fn gen_smoothed_uniform(
    d: usize,
    target_mi: f64,
    n: usize,
    seed: u64,
) -> Result<LabeledDatasetPair> {
    if target_mi < 0.0 {
        return Err(Error::domain("target MI must be nonnegative"));
    }
    let per_component = (target_mi / d as f64).max(MI_FLOOR);
    let eps: Vec<f64> = (0..d)
        .map(|_| smoothed_uniform_eps(per_component))
        .collect::<Result<_>>()?;
    let true_mi = per_component * d as f64;
    let mut rng = rng_from_seed(seed);
    let mut x = crate::numerics::Matrix::zeros(n, d);
    let mut y = crate::numerics::Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let xv: f64 = rand::Rng::random(&mut rng);
            let z: f64 = rand::Rng::random_range(&mut rng, -eps[j]..eps[j]);
            x.set(i, j, xv);
            y.set(i, j, xv + z);
        }
    }
    Ok(LabeledDatasetPair {
        x,
        y,
        true_mi,
        params: FamilyParams::SmoothedUniform { eps },
        mappings: Vec::new(),
        seed,
    })
}

/// Density of `Y = X + Z`; both smoothing regimes.
pub(crate) fn smoothed_uniform_py(y: f64, eps: f64) -> f64 {
    if y < -eps || y >= 1.0 + eps {
        return 0.0;
    }
    if eps < 0.5 {
        if y < eps {
            (y + eps) / (2.0 * eps)
        } else if y < 1.0 - eps {
            1.0
        } else {
            (1.0 + eps - y) / (2.0 * eps)
        }
    } else if y < 1.0 - eps {
        (y + eps) / (2.0 * eps)
    } else if y < eps {
        1.0 / (2.0 * eps)
    } else {
        (1.0 + eps - y) / (2.0 * eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_at_the_knee() {
        // ε = 1/2 sits on both formulas: ½ − ln 1 = ½ and (4·½)⁻¹ = ½
        let mi = smoothed_uniform_mi(0.5).unwrap();
        assert!((mi - 0.5).abs() < 1e-15);
        let lo = smoothed_uniform_mi(0.5 - 1e-9).unwrap();
        assert!((lo - 0.5).abs() < 1e-8);
    }

    #[test]
    fn wide_smoothing_formula() {
        assert!((smoothed_uniform_mi(1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_at_mi_two_uses_lambert() {
        let eps = smoothed_uniform_eps(2.0).unwrap();
        // ε = −W₀(−½ e⁻²); verify by pushing back through the forward map
        assert!(eps < 0.5);
        assert!((eps - 0.0724).abs() < 5e-4);
        let back = smoothed_uniform_mi(eps).unwrap();
        assert!((back - 2.0).abs() < 1e-10);
    }

    #[test]
    fn round_trip_grid() {
        for i in 0..200 {
            let mi = 0.01 + (20.0 - 0.01) * (i as f64) / 199.0;
            let eps = smoothed_uniform_eps(mi).unwrap();
            let back = smoothed_uniform_mi(eps).unwrap();
            assert!((back - mi).abs() < 1e-10, "mi={mi} back={back}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(smoothed_uniform_mi(0.0).is_err());
        assert!(smoothed_uniform_mi(-1.0).is_err());
        assert!(smoothed_uniform_eps(0.0).is_err());
    }

    #[test]
    fn generator_support_and_label() {
        // per-component MI 0.5 means ε = 0.5 and Y stays within [−½, 1½]
        let pair = gen_smoothed_uniform(1, 0.5, 5000, 3).unwrap();
        match &pair.params {
            FamilyParams::SmoothedUniform { eps } => {
                assert!((eps[0] - 0.5).abs() < 1e-12);
            }
            _ => panic!("wrong family"),
        }
        for i in 0..pair.y.rows() {
            let v = pair.y.get(i, 0);
            assert!((-0.5..=1.5).contains(&v));
        }
        assert_eq!(pair.true_mi, 0.5);
    }

    #[test]
    fn tiny_targets_clamp_to_floor() {
        let pair = gen_smoothed_uniform(4, 0.0, 10, 1).unwrap();
        assert!((pair.true_mi - 4.0 * MI_FLOOR).abs() < 1e-15);
        match &pair.params {
            FamilyParams::SmoothedUniform { eps } => {
                for e in eps {
                    assert!((e - 0.25 / MI_FLOOR).abs() < 1e-9);
                }
            }
            _ => unreachable!(),
        }
    }
}
