//! Sample-moment helpers shared by the estimators and the test harness.
//! Covariances are the maximum-likelihood (1/N) estimates throughout.

use crate::numerics::Matrix;

pub fn mean_vec(x: &Matrix) -> Vec<f64> {
    let n = x.rows() as f64;
    let mut m = vec![0.0; x.cols()];
    for i in 0..x.rows() {
        for (acc, &v) in m.iter_mut().zip(x.row(i).iter()) {
            *acc += v;
        }
    }
    for v in &mut m {
        *v /= n;
    }
    m
}

/// Biased (1/N) sample covariance.
pub fn covariance(x: &Matrix) -> Matrix {
    let n = x.rows() as f64;
    let m = mean_vec(x);
    let mut cov = x.matmul_tn(x);
    for i in 0..x.cols() {
        for j in 0..x.cols() {
            let v = cov.get(i, j) / n - m[i] * m[j];
            cov.set(i, j, v);
        }
    }
    // enforce exact symmetry against accumulation order effects
    for i in 0..x.cols() {
        for j in (i + 1)..x.cols() {
            let s = 0.5 * (cov.get(i, j) + cov.get(j, i));
            cov.set(i, j, s);
            cov.set(j, i, s);
        }
    }
    cov
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased (1/(n−1)) standard deviation; 0 for fewer than two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}

/// Kolmogorov–Smirnov distance of a sample against U[0,1], with the
/// asymptotic p-value. Used by statistical sanity tests.
pub fn ks_uniform(sample: &[f64]) -> (f64, f64) {
    let mut s: Vec<f64> = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        p += 2.0 * sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}
