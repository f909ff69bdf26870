use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{std_normal_cdf, svd, Matrix};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::synthetic::dataset::LabeledDatasetPair;
use rand_distr::StandardNormal;

/// Smooth injective per-variable maps. MI is invariant under all of them,
/// so the dataset label is copied verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    Identity,
    /// Elementwise Φ; turns standard normal marginals into uniforms.
    GaussianCdf,
    /// Elementwise arcsinh; tames long tails while staying injective.
    Asinh,
    /// A seeded random well-conditioned invertible matrix per variable,
    /// followed by elementwise arcsinh.
    AffineMix,
    /// AffineMix followed by GaussianCdf.
    Composite,
}

impl MappingKind {
    pub fn parse(name: &str) -> Option<MappingKind> {
        match name {
            "identity" | "none" => Some(MappingKind::Identity),
            "gaussian_cdf" | "uniform" => Some(MappingKind::GaussianCdf),
            "asinh" | "arcsinh" => Some(MappingKind::Asinh),
            "affine_mix" => Some(MappingKind::AffineMix),
            "composite" => Some(MappingKind::Composite),
            _ => None,
        }
    }
}

fn map_elementwise(m: &mut Matrix, f: impl Fn(f64) -> f64) {
    for v in m.data_mut() {
        *v = f(*v);
    }
}

/// Random matrix with singular values in [0.5, 2] (condition number ≤ 4):
/// two random orthogonal factors around a log-uniform diagonal.
fn well_conditioned_matrix(d: usize, rng: &mut Rng) -> Matrix {
    let mut gauss = Matrix::zeros(d, d);
    for v in gauss.data_mut() {
        *v = rand::Rng::sample(rng, StandardNormal);
    }
    let s = svd(&gauss).expect("svd of random matrix");
    let mut diag = Matrix::zeros(d, d);
    for j in 0..d {
        let t: f64 = rand::Rng::random_range(rng, -1.0..1.0);
        diag.set(j, j, 2.0f64.powf(t)); // in [0.5, 2]
    }
    s.u.matmul(&diag).matmul_nt(&s.v)
}

fn apply_affine_mix(m: &Matrix, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let a = well_conditioned_matrix(m.cols(), &mut rng);
    let mut out = m.matmul_nt(&a); // rows are samples: x ↦ A·x
    map_elementwise(&mut out, f64::asinh);
    out
}

/// Apply a mapping to both variables of a dataset. The true MI label is
/// unchanged; the mapping is recorded in the metadata.
pub fn apply_mapping(
    pair: &LabeledDatasetPair,
    map: MappingKind,
    seed: u64,
) -> Result<LabeledDatasetPair> {
    let (x, y) = match map {
        MappingKind::Identity => (pair.x.clone(), pair.y.clone()),
        MappingKind::GaussianCdf => {
            let mut x = pair.x.clone();
            let mut y = pair.y.clone();
            map_elementwise(&mut x, std_normal_cdf);
            map_elementwise(&mut y, std_normal_cdf);
            (x, y)
        }
        MappingKind::Asinh => {
            let mut x = pair.x.clone();
            let mut y = pair.y.clone();
            map_elementwise(&mut x, f64::asinh);
            map_elementwise(&mut y, f64::asinh);
            (x, y)
        }
        MappingKind::AffineMix => (
            apply_affine_mix(&pair.x, derive_seed(seed, 1)),
            apply_affine_mix(&pair.y, derive_seed(seed, 2)),
        ),
        MappingKind::Composite => {
            let mut x = apply_affine_mix(&pair.x, derive_seed(seed, 1));
            let mut y = apply_affine_mix(&pair.y, derive_seed(seed, 2));
            map_elementwise(&mut x, std_normal_cdf);
            map_elementwise(&mut y, std_normal_cdf);
            (x, y)
        }
    };
    let mut mappings = pair.mappings.clone();
    if map != MappingKind::Identity {
        mappings.push(map);
    }
    Ok(LabeledDatasetPair {
        x,
        y,
        true_mi: pair.true_mi,
        params: pair.params.clone(),
        mappings,
        seed: pair.seed,
    })
}
