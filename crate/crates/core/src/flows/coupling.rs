use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{GradTape, Mlp};
use crate::numerics::Matrix;
use crate::rng::Rng;

/// Affine coupling layer. The first `split` coordinates pass through
/// unchanged and condition an elementwise affine map of the rest:
/// `y₂ = x₂ ⊙ exp(s(x₁)) + t(x₁)`. The Jacobian is triangular, so the
/// log-determinant is the sum of the effective scales.
///
/// The raw scale output is squashed through `s_max·tanh(·/s_max)` to keep
/// `exp(s)` bounded on long-tailed inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCoupling {
    split: usize,
    scale_net: Mlp,
    translate_net: Mlp,
    s_max: f64,
}

#[derive(Debug, Clone)]
pub struct CouplingTape {
    pub(crate) b_in: Matrix,
    /// tanh(s_raw/s_max), cached for the clamp derivative.
    pub(crate) tanh_s: Matrix,
    pub(crate) exp_s: Matrix,
    pub(crate) scale_tape: GradTape,
    pub(crate) translate_tape: GradTape,
}

impl AffineCoupling {
    /// `dim ≥ 2`; the pass-through half is `ceil(dim/2)` wide. Conditioner
    /// MLPs have one hidden layer of `hidden` units and zero-initialized
    /// output layers, so a fresh coupling layer is the identity map.
    pub fn new(dim: usize, hidden: usize, s_max: f64, rng: &mut Rng) -> Self {
        assert!(dim >= 2, "coupling needs at least two coordinates");
        let split = dim.div_ceil(2);
        let widths = [split, hidden, dim - split];
        AffineCoupling {
            split,
            scale_net: Mlp::new(&widths, rng),
            translate_net: Mlp::new(&widths, rng),
            s_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.split + self.scale_net.output_width()
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn param_count(&self) -> usize {
        self.scale_net.param_count() + self.translate_net.param_count()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        self.scale_net.write_params(out);
        self.translate_net.write_params(out);
    }

    pub fn read_params(&mut self, src: &[f64], cursor: &mut usize) {
        self.scale_net.read_params(src, cursor);
        self.translate_net.read_params(src, cursor);
    }

    /// tanh(s_raw/s_max) and the clamped scale s_max·tanh(s_raw/s_max).
    fn clamped_scale(&self, s_raw: &Matrix) -> (Matrix, Matrix) {
        let mut th = s_raw.clone();
        for v in th.data_mut() {
            *v = (*v / self.s_max).tanh();
        }
        let mut s = th.clone();
        for v in s.data_mut() {
            *v *= self.s_max;
        }
        (th, s)
    }

    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>, CouplingTape)> {
        if x.cols() != self.dim() {
            return Err(Error::shape(format!(
                "coupling forward: batch width {} != {}",
                x.cols(),
                self.dim()
            )));
        }
        let a = x.slice_cols(0, self.split);
        let b = x.slice_cols(self.split, x.cols());
        let (s_raw, scale_tape) = self.scale_net.forward(&a)?;
        let (t, translate_tape) = self.translate_net.forward(&a)?;
        let (tanh_s, s_c) = self.clamped_scale(&s_raw);
        let mut exp_s = s_c.clone();
        for v in exp_s.data_mut() {
            *v = v.exp();
        }
        let mut y = x.clone();
        let mut logdet = vec![0.0; x.rows()];
        for i in 0..x.rows() {
            let yb = &mut y.row_mut(i)[self.split..];
            let (bi, ei, ti, si) = (b.row(i), exp_s.row(i), t.row(i), s_c.row(i));
            let mut ld = 0.0;
            for j in 0..yb.len() {
                yb[j] = bi[j] * ei[j] + ti[j];
                ld += si[j];
            }
            logdet[i] = ld;
        }
        let tape = CouplingTape { b_in: b, tanh_s, exp_s, scale_tape, translate_tape };
        Ok((y, logdet, tape))
    }

    pub fn inverse(&self, y: &Matrix) -> Result<Matrix> {
        if y.cols() != self.dim() {
            return Err(Error::shape("coupling inverse: width mismatch".to_string()));
        }
        let a = y.slice_cols(0, self.split);
        let (s_raw, _) = self.scale_net.forward(&a)?;
        let (t, _) = self.translate_net.forward(&a)?;
        let (_, s_c) = self.clamped_scale(&s_raw);
        let mut x = y.clone();
        for i in 0..y.rows() {
            let xb = &mut x.row_mut(i)[self.split..];
            let (si, ti) = (s_c.row(i), t.row(i));
            for j in 0..xb.len() {
                xb[j] = (xb[j] - ti[j]) * (-si[j]).exp();
            }
        }
        Ok(x)
    }

    /// `upstream` is ∂L/∂y, `upstream_logdet[i]` is ∂L/∂logdet_i. Writes the
    /// parameter gradients (scale net first) and returns ∂L/∂x.
    pub fn backward(
        &self,
        tape: &CouplingTape,
        upstream: &Matrix,
        upstream_logdet: &[f64],
        grads_out: &mut Vec<f64>,
    ) -> Result<Matrix> {
        let rows = tape.b_in.rows();
        if upstream.rows() != rows
            || upstream.cols() != self.dim()
            || upstream_logdet.len() != rows
        {
            return Err(Error::StaleTape);
        }
        let rest = self.dim() - self.split;
        let mut d_b = Matrix::zeros(rows, rest);
        let mut d_s_raw = Matrix::zeros(rows, rest);
        let mut d_t = Matrix::zeros(rows, rest);
        for i in 0..rows {
            let up_b = &upstream.row(i)[self.split..];
            let (bi, ei, thi) = (tape.b_in.row(i), tape.exp_s.row(i), tape.tanh_s.row(i));
            let ld = upstream_logdet[i];
            for j in 0..rest {
                d_b.row_mut(i)[j] = up_b[j] * ei[j];
                // chain through the tanh clamp
                let th = thi[j];
                let d_sc = up_b[j] * bi[j] * ei[j] + ld;
                d_s_raw.row_mut(i)[j] = d_sc * (1.0 - th * th);
                d_t.row_mut(i)[j] = up_b[j];
            }
        }
        let (scale_grads, da_scale) = self.scale_net.backward(&tape.scale_tape, &d_s_raw)?;
        let (translate_grads, da_translate) =
            self.translate_net.backward(&tape.translate_tape, &d_t)?;
        scale_grads.write_flat(grads_out);
        translate_grads.write_flat(grads_out);

        let mut dx = Matrix::zeros(rows, self.dim());
        for i in 0..rows {
            let row = dx.row_mut(i);
            let up_a = &upstream.row(i)[..self.split];
            for j in 0..self.split {
                row[j] = up_a[j] + da_scale.get(i, j) + da_translate.get(i, j);
            }
            row[self.split..].copy_from_slice(d_b.row(i));
        }
        Ok(dx)
    }
}
