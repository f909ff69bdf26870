use serde::{Deserialize, Serialize};

use crate::numerics::Matrix;

/// Half-swap permutation, realized as a rotation of the coordinate vector by
/// `split` places so odd dimensions cycle cleanly. Volume preserving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swap {
    pub dim: usize,
    pub split: usize,
}

impl Swap {
    pub fn half(dim: usize) -> Self {
        Swap { dim, split: dim.div_ceil(2) }
    }

    fn rotate(&self, x: &Matrix, by: usize) -> Matrix {
        let mut y = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let src = x.row(i);
            let dst = y.row_mut(i);
            for j in 0..self.dim {
                dst[j] = src[(j + by) % self.dim];
            }
        }
        y
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        self.rotate(x, self.split)
    }

    pub fn inverse(&self, y: &Matrix) -> Matrix {
        self.rotate(y, self.dim - self.split)
    }

    /// Gradients permute the opposite way.
    pub fn backward(&self, upstream: &Matrix) -> Matrix {
        self.inverse(upstream)
    }
}

/// Learnable per-dimension affine map `y = x ⊙ exp(log_scale) + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagAffine {
    pub log_scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl DiagAffine {
    pub fn identity(dim: usize) -> Self {
        DiagAffine { log_scale: vec![0.0; dim], shift: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.log_scale.len()
    }

    pub fn param_count(&self) -> usize {
        2 * self.log_scale.len()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.log_scale);
        out.extend_from_slice(&self.shift);
    }

    pub fn read_params(&mut self, src: &[f64], cursor: &mut usize) {
        let d = self.log_scale.len();
        self.log_scale.copy_from_slice(&src[*cursor..*cursor + d]);
        *cursor += d;
        self.shift.copy_from_slice(&src[*cursor..*cursor + d]);
        *cursor += d;
    }

    pub fn forward(&self, x: &Matrix) -> (Matrix, Vec<f64>) {
        let ld: f64 = self.log_scale.iter().sum();
        let mut y = x.clone();
        for i in 0..y.rows() {
            for (j, v) in y.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.log_scale[j].exp() + self.shift[j];
            }
        }
        (y, vec![ld; x.rows()])
    }

    pub fn inverse(&self, y: &Matrix) -> Matrix {
        let mut x = y.clone();
        for i in 0..x.rows() {
            for (j, v) in x.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.shift[j]) * (-self.log_scale[j]).exp();
            }
        }
        x
    }

    pub fn backward(
        &self,
        x_in: &Matrix,
        upstream: &Matrix,
        upstream_logdet: &[f64],
        grads_out: &mut Vec<f64>,
    ) -> Matrix {
        let d = self.dim();
        let mut g_ls = vec![0.0; d];
        let mut g_shift = vec![0.0; d];
        let mut dx = Matrix::zeros(upstream.rows(), d);
        let ld_sum: f64 = upstream_logdet.iter().sum();
        for i in 0..upstream.rows() {
            for j in 0..d {
                let e = self.log_scale[j].exp();
                let up = upstream.get(i, j);
                g_ls[j] += up * x_in.get(i, j) * e;
                g_shift[j] += up;
                dx.set(i, j, up * e);
            }
        }
        for g in &mut g_ls {
            *g += ld_sum;
        }
        grads_out.extend_from_slice(&g_ls);
        grads_out.extend_from_slice(&g_shift);
        dx
    }
}

/// Fixed (non-learnable) per-dimension affine map used to standardize
/// inputs before the trainable layers: `y = x ⊙ scale + shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedAffine {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl FixedAffine {
    pub fn identity(dim: usize) -> Self {
        FixedAffine { scale: vec![1.0; dim], shift: vec![0.0; dim] }
    }

    /// Standardizer from per-coordinate sample moments: subtract the mean,
    /// divide by the standard deviation. Degenerate coordinates keep unit
    /// scale.
    pub fn standardizer(data: &Matrix) -> Self {
        let n = data.rows() as f64;
        let d = data.cols();
        let mut mean = vec![0.0; d];
        let mut var = vec![0.0; d];
        for i in 0..data.rows() {
            for (j, &v) in data.row(i).iter().enumerate() {
                mean[j] += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        for i in 0..data.rows() {
            for (j, &v) in data.row(i).iter().enumerate() {
                var[j] += (v - mean[j]) * (v - mean[j]);
            }
        }
        let mut scale = vec![1.0; d];
        let mut shift = vec![0.0; d];
        for j in 0..d {
            let sd = (var[j] / n).sqrt();
            if sd > 1e-12 {
                scale[j] = 1.0 / sd;
            }
            shift[j] = -mean[j] * scale[j];
        }
        FixedAffine { scale, shift }
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    pub fn forward(&self, x: &Matrix) -> (Matrix, Vec<f64>) {
        let ld: f64 = self.scale.iter().map(|s| s.abs().ln()).sum();
        let mut y = x.clone();
        for i in 0..y.rows() {
            for (j, v) in y.row_mut(i).iter_mut().enumerate() {
                *v = *v * self.scale[j] + self.shift[j];
            }
        }
        (y, vec![ld; x.rows()])
    }

    pub fn inverse(&self, y: &Matrix) -> Matrix {
        let mut x = y.clone();
        for i in 0..x.rows() {
            for (j, v) in x.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.shift[j]) / self.scale[j];
            }
        }
        x
    }

    pub fn backward(&self, upstream: &Matrix) -> Matrix {
        let mut dx = upstream.clone();
        for i in 0..dx.rows() {
            for (j, v) in dx.row_mut(i).iter_mut().enumerate() {
                *v *= self.scale[j];
            }
        }
        dx
    }
}
