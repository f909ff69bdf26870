//! Standard normal density, CDF and quantile.
//!
//! The CDF goes through the regularized incomplete gamma functions
//! (`erf(x) = P(1/2, x²)`), which keeps double precision in both the bulk
//! and the far tails. The quantile is a bracketed Newton solve against that
//! CDF, so the pair is mutually inverse to solver tolerance.

use crate::error::{Error, Result};
use crate::numerics::special::{gamma_p, gamma_q};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Lower-tail mass Φ(−t) for t ≥ 0, computed without cancellation.
fn lower_tail(t: f64) -> f64 {
    let u = t / SQRT_2;
    if u * u < 1.5 {
        0.5 * (1.0 - gamma_p(0.5, u * u).expect("valid erf argument"))
    } else {
        0.5 * gamma_q(0.5, u * u).expect("valid erfc argument")
    }
}

/// Φ(x), the standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - lower_tail(x)
    } else {
        lower_tail(-x)
    }
}

/// Φ⁻¹(p) for p ∈ (0, 1). Solved through the smaller tail so no precision
/// is lost near p → 1 (the complement `1 − p` is exact there); bisection
/// narrows the bracket, log-space Newton with the exact density finishes.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "std_normal_quantile requires p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let q = p.min(1.0 - p);
    let log_q = q.ln();
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    let mut t = (-2.0 * (2.0 * q).ln()).max(0.0).sqrt();
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if lower_tail(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t = t.clamp(lo, hi);
    for _ in 0..60 {
        let tail = lower_tail(t);
        if tail > q {
            lo = t;
        } else {
            hi = t;
        }
        // Newton on log(tail) - log(q); slope is -pdf/tail
        let f = tail.ln() - log_q;
        let d = -std_normal_pdf(t) / tail;
        let mut next = t - f / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            t = next;
            break;
        }
        t = next;
    }
    Ok(if p < 0.5 { -t } else { t })
}
