use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::Rng;
use rand::Rng as _;

/// Elementwise strictly monotone map for one-dimensional variables, where a
/// coupling layer has nothing to condition on: an affine part plus a bounded
/// tanh residual,
///
/// `y = e^a·x + b + s·tanh(e^c·x + d₀)`, `s = 0.99·tanh(u)·e^{a−c}`.
///
/// The residual amplitude bound makes `dy/dx = e^a·(1 + 0.99·tanh(u)·tanhʹ)`
/// positive for every parameter value, so the layer is invertible by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneElementwise {
    slope: Vec<f64>,   // a, log of the affine slope
    offset: Vec<f64>,  // b
    residual: Vec<f64>, // u, squashed residual amplitude
    inner_scale: Vec<f64>, // c, log of the inner scale
    inner_shift: Vec<f64>, // d₀
}

const AMP: f64 = 0.99;

impl MonotoneElementwise {
    /// Starts as the exact identity (`u = 0` kills the residual); the inner
    /// scale and shift get small random offsets so stacked layers receive
    /// distinct gradients.
    pub fn new(dim: usize, rng: &mut Rng) -> Self {
        MonotoneElementwise {
            slope: vec![0.0; dim],
            offset: vec![0.0; dim],
            residual: vec![0.0; dim],
            inner_scale: (0..dim).map(|_| rng.random_range(-0.3..0.3)).collect(),
            inner_shift: (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    pub fn param_count(&self) -> usize {
        5 * self.slope.len()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.slope);
        out.extend_from_slice(&self.offset);
        out.extend_from_slice(&self.residual);
        out.extend_from_slice(&self.inner_scale);
        out.extend_from_slice(&self.inner_shift);
    }

    pub fn read_params(&mut self, src: &[f64], cursor: &mut usize) {
        let d = self.dim();
        for field in [
            &mut self.slope,
            &mut self.offset,
            &mut self.residual,
            &mut self.inner_scale,
            &mut self.inner_shift,
        ] {
            field.copy_from_slice(&src[*cursor..*cursor + d]);
            *cursor += d;
        }
    }

    #[inline]
    fn eval(&self, j: usize, x: f64) -> (f64, f64) {
        let ea = self.slope[j].exp();
        let ec = self.inner_scale[j].exp();
        let r = AMP * self.residual[j].tanh();
        let s = r * ea / ec;
        let th = (ec * x + self.inner_shift[j]).tanh();
        let thp = 1.0 - th * th;
        let y = ea * x + self.offset[j] + s * th;
        let logdd = self.slope[j] + (1.0 + r * thp).ln();
        (y, logdd)
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        if x.cols() != self.dim() {
            return Err(Error::shape("monotone forward: width mismatch".to_string()));
        }
        let mut y = x.clone();
        let mut logdet = vec![0.0; x.rows()];
        for i in 0..x.rows() {
            let mut ld = 0.0;
            for (j, v) in y.row_mut(i).iter_mut().enumerate() {
                let (yy, ldd) = self.eval(j, *v);
                *v = yy;
                ld += ldd;
            }
            logdet[i] = ld;
        }
        Ok((y, logdet))
    }

    pub fn inverse(&self, y: &Matrix) -> Result<Matrix> {
        if y.cols() != self.dim() {
            return Err(Error::shape("monotone inverse: width mismatch".to_string()));
        }
        let mut x = y.clone();
        for i in 0..y.rows() {
            for (j, v) in x.row_mut(i).iter_mut().enumerate() {
                let target = *v;
                let ea = self.slope[j].exp();
                let ec = self.inner_scale[j].exp();
                let s = (AMP * self.residual[j].tanh() * ea / ec).abs();
                let mut lo = (target - self.offset[j] - s) / ea - 1.0;
                let mut hi = (target - self.offset[j] + s) / ea + 1.0;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(j, mid).0 < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                *v = 0.5 * (lo + hi);
            }
        }
        Ok(x)
    }

    pub fn backward(
        &self,
        x_in: &Matrix,
        upstream: &Matrix,
        upstream_logdet: &[f64],
        grads_out: &mut Vec<f64>,
    ) -> Result<Matrix> {
        let d = self.dim();
        let rows = x_in.rows();
        if upstream.rows() != rows || upstream.cols() != d || upstream_logdet.len() != rows {
            return Err(Error::StaleTape);
        }
        let mut g = vec![vec![0.0; d]; 5];
        let mut dx = Matrix::zeros(rows, d);
        for i in 0..rows {
            let h = upstream_logdet[i];
            for j in 0..d {
                let x = x_in.get(i, j);
                let up = upstream.get(i, j);
                let ea = self.slope[j].exp();
                let ec = self.inner_scale[j].exp();
                let tu = self.residual[j].tanh();
                let r = AMP * tu;
                let s = r * ea / ec;
                let th = (ec * x + self.inner_shift[j]).tanh();
                let thp = 1.0 - th * th;
                let p = 1.0 + r * thp;
                let dthp = -2.0 * th * thp; // d(thp)/d(inner)

                // value path
                g[0][j] += up * (ea * x + s * th);
                g[1][j] += up;
                g[2][j] += up * AMP * (1.0 - tu * tu) * (ea / ec) * th;
                g[3][j] += up * (-s * th + s * thp * ec * x);
                g[4][j] += up * s * thp;
                // log-det path
                g[0][j] += h;
                g[2][j] += h * thp * AMP * (1.0 - tu * tu) / p;
                g[3][j] += h * r * dthp * ec * x / p;
                g[4][j] += h * r * dthp / p;

                dx.set(i, j, up * ea * p + h * r * dthp * ec / p);
            }
        }
        for field in &g {
            grads_out.extend_from_slice(field);
        }
        Ok(dx)
    }
}
