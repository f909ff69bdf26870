//! Special functions: log-gamma, digamma, the principal Lambert W branch on
//! the negative real axis, and regularized incomplete gamma functions.
//!
//! log Γ and ψ use upward recurrence into the asymptotic (Stirling) regime,
//! which keeps every coefficient an exact rational of Bernoulli numbers. The
//! incomplete gamma pair follows the classic series / Lentz continued
//! fraction split and backs the normal CDF.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant, ψ(1) = −γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const STIRLING_CUTOFF: f64 = 10.0;

// B_{2k} / (2k(2k−1)) for the log Γ asymptotic series.
const LOG_GAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

// B_{2k} / (2k) for the digamma asymptotic series.
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

/// Natural log of the gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < STIRLING_CUTOFF {
        shift -= z.ln();
        z += 1.0;
    }
    let mut series = 0.0;
    let z2 = z * z;
    let mut pow = z;
    for c in LOG_GAMMA_SERIES {
        series += c / pow;
        pow *= z2;
    }
    let half_log_two_pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    Ok((z - 0.5) * z.ln() - z + half_log_two_pi + series + shift)
}

/// Digamma ψ(x) = d/dx log Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < STIRLING_CUTOFF {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let mut series = 0.0;
    let z2 = z * z;
    let mut pow = z2;
    for c in DIGAMMA_SERIES {
        series += c / pow;
        pow *= z2;
    }
    Ok(z.ln() - 0.5 / z - series + shift)
}

/// Principal branch W₀ of the Lambert W function on `[-1/e, 0)`, the range
/// needed to invert `ε − log 2ε`. Satisfies `W e^W = t` with `W ≥ −1`.
pub fn lambert_w0(t: f64) -> Result<f64> {
    let branch_point = -(-1.0f64).exp(); // -1/e
    if !t.is_finite() || t >= 0.0 || t < branch_point - 1e-12 {
        return Err(Error::domain(format!(
            "lambert_w0 requires t in [-1/e, 0), got {t}"
        )));
    }
    let t = t.max(branch_point);
    // series around the branch point, else W ≈ t near zero
    let mut w = if t < branch_point + 0.04 {
        let p = (2.0 * (1.0 + std::f64::consts::E * t)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else {
        let mut w = t;
        // a couple of fixed-point steps w ← t·e^{−w} to get into the basin
        for _ in 0..4 {
            w = t * (-w).exp();
        }
        w
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - t;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-14 {
            break; // at the branch point
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if x < 0.0 || a <= 0.0 {
        return Err(Error::domain("gamma_p requires a > 0, x >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gamma_p_series(a, x)?)
    } else {
        Ok(1.0 - gamma_q_cf(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if x < 0.0 || a <= 0.0 {
        return Err(Error::domain("gamma_q requires a > 0, x >= 0"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x)?)
    } else {
        Ok(gamma_q_cf(a, x)?)
    }
}

fn gamma_p_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    Ok(sum * (-x + a * x.ln() - log_gamma(a)?).exp())
}

/// Lentz's algorithm for the continued fraction of Q(a, x).
fn gamma_q_cf(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    Ok((-x + a * x.ln() - log_gamma(a)?).exp() * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_known_points() {
        // Γ(1) = Γ(2) = 1
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        // Γ(1/2) = √π
        let expect = 0.5 * std::f64::consts::PI.ln();
        assert!((log_gamma(0.5).unwrap() - expect).abs() < 1e-13);
        // Γ(6) = 120
        assert!((log_gamma(6.0).unwrap() - 120.0f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_recurrence_high_range() {
        // log Γ(x+1) = log Γ(x) + log x, spot checked up to 1e6
        for &x in &[0.5, 1.3, 7.7, 42.0, 1234.5, 1.0e6 - 1.0] {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            let rel = (lhs - rhs).abs() / rhs.abs().max(1.0);
            assert!(rel < 1e-12, "recurrence failed at {x}: {rel}");
        }
    }

    #[test]
    fn digamma_known_points() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-12);
        // ψ(2) = 1 − γ
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-12);
        // ψ(1/2) = −γ − 2 ln 2
        let expect = -EULER_GAMMA - 2.0 * 2.0f64.ln();
        assert!((digamma(0.5).unwrap() - expect).abs() < 1e-12);
        // recurrence ψ(x+1) = ψ(x) + 1/x
        for &x in &[0.3, 2.6, 9.9, 120.0] {
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(digamma(0.0).is_err());
        assert!(lambert_w0(0.1).is_err());
        assert!(lambert_w0(-1.0).is_err());
    }

    #[test]
    fn lambert_branch_point_and_known_value() {
        let e = std::f64::consts::E;
        assert!((lambert_w0(-1.0 / e).unwrap() + 1.0).abs() < 1e-6);
        // w e^w at w = −0.5
        let t = -0.5 * (-0.5f64).exp();
        assert!((lambert_w0(t).unwrap() + 0.5).abs() < 1e-12);
        // t → 0⁻ gives W → 0⁻
        let w = lambert_w0(-1e-12).unwrap();
        assert!(w < 0.0 && w > -1.1e-12);
    }

    #[test]
    fn lambert_round_trip() {
        for i in 0..200 {
            let w = -1.0 + 0.9999 * (i as f64) / 200.0;
            let t = w * w.exp();
            if t >= 0.0 {
                continue;
            }
            let back = lambert_w0(t).unwrap();
            assert!((back - w).abs() < 1e-10, "w={w} back={back}");
            let resid = (back * back.exp() - t).abs();
            assert!(resid < 1e-12, "residual {resid} at w={w}");
        }
    }

    #[test]
    fn incomplete_gamma_complement() {
        for &(a, x) in &[(0.5, 0.2), (0.5, 3.0), (2.5, 1.0), (7.0, 12.0)] {
            let p = gamma_p(a, x).unwrap();
            let q = gamma_q(a, x).unwrap();
            assert!((p + q - 1.0).abs() < 1e-14);
        }
        // P(1, x) = 1 − e^{−x}
        let p = gamma_p(1.0, 0.7).unwrap();
        assert!((p - (1.0 - (-0.7f64).exp())).abs() < 1e-14);
    }
}
