use crate::error::{Error, Result};
use crate::numerics::{digamma, Matrix};
use crate::rng::rng_from_seed;

/// Jitter scale applied (relative to each coordinate's spread) when exact
/// duplicate values would tie the max-norm neighbor counts.
const JITTER: f64 = 1e-10;

/// Nearest-neighbor MI estimate with max-norm neighborhoods:
/// `ψ(k) + ψ(N) − ⟨ψ(n_x+1) + ψ(n_y+1)⟩`, where `n_x`, `n_y` count strict
/// marginal neighbors inside each point's k-th joint neighbor distance.
/// Deterministic given the data; clamped at zero.
pub fn estimate_ksg(x: &Matrix, y: &Matrix, k: usize) -> Result<f64> {
    let n = x.rows();
    if y.rows() != n {
        return Err(Error::shape("paired samples must have equal counts".to_string()));
    }
    if k < 1 || n <= k {
        return Err(Error::InsufficientSamples { got: n, need: k + 1 });
    }
    let (x, y) = dedupe(x, y);

    let mut joint = vec![0.0f64; n];
    let mut dx = vec![0.0f64; n];
    let mut dy = vec![0.0f64; n];
    let mut scratch = vec![0.0f64; n];
    let mut psi_terms = Vec::with_capacity(n);
    for i in 0..n {
        let xi = x.row(i);
        let yi = y.row(i);
        for j in 0..n {
            let dxj = max_norm(xi, x.row(j));
            let dyj = max_norm(yi, y.row(j));
            dx[j] = dxj;
            dy[j] = dyj;
            joint[j] = dxj.max(dyj);
        }
        joint[i] = f64::INFINITY;
        scratch.copy_from_slice(&joint);
        let (_, kth, _) =
            scratch.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).unwrap());
        let eps = *kth;
        let mut nx = 0usize;
        let mut ny = 0usize;
        for j in 0..n {
            if j == i {
                continue;
            }
            if dx[j] < eps {
                nx += 1;
            }
            if dy[j] < eps {
                ny += 1;
            }
        }
        psi_terms.push(digamma((nx + 1) as f64)? + digamma((ny + 1) as f64)?);
    }
    // sum in value order so the estimate is exactly permutation invariant
    psi_terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let psi_sum: f64 = psi_terms.iter().sum();
    let mi = digamma(k as f64)? + digamma(n as f64)? - psi_sum / n as f64;
    Ok(mi.max(0.0))
}

#[inline]
fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for (&p, &q) in a.iter().zip(b.iter()) {
        let d = (p - q).abs();
        if d > m {
            m = d;
        }
    }
    m
}

/// Detect exact duplicate values in any coordinate; only then jitter (with a
/// fixed-seed stream), so duplicate-free inputs stay untouched and the
/// estimate is exactly permutation invariant on them.
fn dedupe(x: &Matrix, y: &Matrix) -> (Matrix, Matrix) {
    if !has_column_duplicates(x) && !has_column_duplicates(y) {
        return (x.clone(), y.clone());
    }
    let mut rng = rng_from_seed(0x4b53_475f_4a49_5454); // constant stream
    let mut jittered_x = x.clone();
    let mut jittered_y = y.clone();
    for m in [&mut jittered_x, &mut jittered_y] {
        for j in 0..m.cols() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..m.rows() {
                lo = lo.min(m.get(i, j));
                hi = hi.max(m.get(i, j));
            }
            let scale = (hi - lo).max(1.0) * JITTER;
            for i in 0..m.rows() {
                let noise: f64 = rand::Rng::random_range(&mut rng, -scale..scale);
                m.set(i, j, m.get(i, j) + noise);
            }
        }
    }
    (jittered_x, jittered_y)
}

fn has_column_duplicates(m: &Matrix) -> bool {
    let mut col = vec![0.0f64; m.rows()];
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            col[i] = m.get(i, j);
        }
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if col.windows(2).any(|w| w[0] == w[1]) {
            return true;
        }
    }
    false
}
