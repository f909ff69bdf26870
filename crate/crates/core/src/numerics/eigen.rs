use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Eigendecomposition of a symmetric matrix: `S = Q·diag(λ)·Qᵀ` with
/// eigenvalues sorted in descending order and orthonormal columns in `Q`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver. A sequence of plane rotations annihilates the
/// off-diagonal entries; the accumulated rotations form the eigenvector
/// matrix. Robust for every real symmetric input at the dimensions this
/// crate works with.
pub fn sym_eigen(s: &Matrix) -> Result<SymmetricEigen> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::shape("sym_eigen needs a square matrix"));
    }
    let tol = 1e-10 * s.max_abs().max(1.0);
    if !s.is_symmetric(tol) {
        return Err(Error::domain("sym_eigen: matrix is not symmetric"));
    }

    let mut a = s.clone();
    // symmetrize exactly so rotations keep both triangles consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, m);
            a.set(j, i, m);
        }
    }
    let mut q = Matrix::identity(n);
    let stop = 1e-12 * s.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if (2.0 * off).sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = a.get(p, r);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(r, r);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, r);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, r, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(r, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(r, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, r);
                    q.set(k, p, c * qkp - sn * qkq);
                    q.set(k, r, sn * qkp + c * qkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors.set(k, dst, q.get(k, src));
        }
    }
    Ok(SymmetricEigen { eigenvalues, eigenvectors })
}

impl SymmetricEigen {
    /// `Q·diag(f(λ))·Qᵀ` — used for symmetric matrix square roots and
    /// inverse square roots.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let lf = f(self.eigenvalues[j]);
            for i in 0..n {
                scaled.set(i, j, scaled.get(i, j) * lf);
            }
        }
        scaled.matmul_nt(&self.eigenvectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn identity_eigen() {
        let e = sym_eigen(&Matrix::identity(3)).unwrap();
        for l in &e.eigenvalues {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let s = Matrix::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eigen(&s).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_signs_preserved() {
        let s = Matrix::from_vec(2, 2, vec![5.0, 0.0, 0.0, -1.0]).unwrap();
        let e = sym_eigen(&s).unwrap();
        assert_eq!(e.eigenvalues, vec![5.0, -1.0]);
    }

    #[test]
    fn reconstruction_and_orthogonality_random() {
        let mut rng = rng_from_seed(11);
        for dim in [2usize, 5, 16, 33] {
            let mut s = Matrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..=i {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    s.set(i, j, v);
                    s.set(j, i, v);
                }
            }
            let e = sym_eigen(&s).unwrap();
            let rec = e.apply_spectral(|l| l);
            let rel = rec.sub(&s).frobenius_norm() / s.frobenius_norm();
            assert!(rel < 1e-10, "reconstruction error {rel} at dim {dim}");
            let qtq = e.eigenvectors.matmul_tn(&e.eigenvectors);
            assert!(qtq.sub(&Matrix::identity(dim)).max_abs() < 1e-10);
        }
    }
}
