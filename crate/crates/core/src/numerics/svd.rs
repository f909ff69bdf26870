use crate::error::Result;
use crate::numerics::eigen::sym_eigen;
use crate::numerics::Matrix;

/// Singular value decomposition `C = U·diag(σ)·Vᵀ` with `U`, `V` square
/// orthogonal and σ nonnegative descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// SVD through the eigendecomposition of the Gram matrix of the smaller
/// side. Adequate at the sizes used here (canonical correlations of desk
/// scale covariances); singular values are clamped at zero and the left
/// factor is completed to a full orthogonal basis when the matrix is rank
/// deficient.
pub fn svd(c: &Matrix) -> Result<Svd> {
    if c.rows() < c.cols() {
        let t = svd(&c.transpose())?;
        return Ok(Svd { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    let (m, n) = (c.rows(), c.cols());
    let gram = c.matmul_tn(c); // n x n
    let eig = sym_eigen(&gram)?;
    let v = eig.eigenvectors;

    // σ_j from ‖C v_j‖ rather than √λ_j: the Gram route squares the
    // conditioning, and for a numerically null eigenpair √λ can sit far
    // above the true (zero) singular value while C v_j stays tiny. With
    // σ_j u_j = C v_j exactly, the reconstruction identity holds to
    // round-off for any rank.
    let mut triplets: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for j in 0..n {
        let vj: Vec<f64> = (0..n).map(|i| v.get(i, j)).collect();
        let w = c.mul_vec(&vj);
        let sigma = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        triplets.push((sigma, w));
    }
    let sigma_max = triplets.iter().map(|t| t.0).fold(0.0f64, f64::max);
    let tol = 1e-12 * sigma_max;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| triplets[b].0.partial_cmp(&triplets[a].0).unwrap());

    let mut singular_values = Vec::with_capacity(n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        let (sigma, w) = &triplets[src];
        for i in 0..n {
            v_sorted.set(i, dst, v.get(i, src));
        }
        if *sigma > tol {
            singular_values.push(*sigma);
            u_cols.push(w.iter().map(|x| x / sigma).collect());
        } else {
            singular_values.push(0.0);
        }
    }
    orthonormal_complete(&mut u_cols, m);
    let mut u = Matrix::zeros(m, m);
    for (j, col) in u_cols.iter().enumerate() {
        for i in 0..m {
            u.set(i, j, col[i]);
        }
    }
    Ok(Svd { u, singular_values, v: v_sorted })
}

/// Modified Gram-Schmidt pass over the existing columns, then fill with
/// orthonormalized canonical vectors up to a full basis of dimension `m`.
fn orthonormal_complete(cols: &mut Vec<Vec<f64>>, m: usize) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(m);
    for col in cols.iter() {
        let mut w = col.clone();
        for k in &kept {
            let d = dot(&w, k);
            for (wi, ki) in w.iter_mut().zip(k.iter()) {
                *wi -= d * ki;
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > 1e-13 {
            for wi in &mut w {
                *wi /= norm;
            }
            kept.push(w);
        } else {
            // keep positional alignment with the singular values; a fresh
            // direction is injected below
            kept.push(vec![0.0; m]);
        }
    }
    // replace any zeroed slots and extend to m columns with canonical vectors
    let mut canon = 0usize;
    for j in 0..m {
        if j < kept.len() && dot(&kept[j], &kept[j]) > 0.5 {
            continue;
        }
        loop {
            assert!(canon < m, "failed to complete orthonormal basis");
            let mut w = vec![0.0; m];
            w[canon] = 1.0;
            canon += 1;
            for k in kept.iter().filter(|k| dot(k, k) > 0.5) {
                let d = dot(&w, k);
                for (wi, ki) in w.iter_mut().zip(k.iter()) {
                    *wi -= d * ki;
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > 1e-6 {
                for wi in &mut w {
                    *wi /= norm;
                }
                if j < kept.len() {
                    kept[j] = w;
                } else {
                    kept.push(w);
                }
                break;
            }
        }
    }
    *cols = kept;
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
